#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dfm2d/mortar.hpp"
#include "dfm2d/triangulate.hpp"

namespace dfm {

/// One subdomain: a node of the mixed-dimensional graph.
struct SubdomainNode {
    int id = -1;
    int dim = 2;
    Grid grid;
    std::map<std::string, double> params;
    int fracture = -1;    // fracture id for 1d nodes
    int pnet_point = -1;  // network point id for 0d nodes
};

/// One interface: an edge of the graph, connecting subdomains one dimension
/// apart and carrying the mortar grid.
struct InterfaceEdge {
    int id = -1;
    int high = -1;  // node id of the higher-dimensional neighbor
    int low = -1;
    MortarGrid mortar;
    std::map<std::string, double> params;
    int fracture = -1;    // fracture id for 2d-1d edges
    int pnet_point = -1;  // point id for 1d-0d edges

    // 2d-1d extras used by mechanics: ordered wall pairs and fracture frame.
    std::vector<WallPair> pairs;
    Vec2 tangent{0, 0}, normal{0, 0};
};

struct NeighborSplit {
    std::vector<int> higher;  // edges toward higher-dimensional neighbors
    std::vector<int> lower;   // edges toward lower-dimensional neighbors
};

/// Graph of subdomains (nodes) and interfaces (edges). Every edge connects
/// nodes whose dimensions differ by exactly one.
struct MixedDimGraph {
    std::vector<SubdomainNode> nodes;
    std::vector<InterfaceEdge> edges;

    int matrix_node = -1;               // the 2d subdomain
    std::vector<int> fracture_nodes;    // node id per fracture
    std::map<int, int> point_nodes;     // pnet point id -> node id

    int add_node(int dim, Grid g);
    int add_edge(int high, int low, MortarGrid m);

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    /// Incident edges of a node, split by whether the neighbor has higher or
    /// lower dimension.
    NeighborSplit sorted_neighbors(int node) const;
};

/// Assemble the graph from a processed network and its grids: one 2d node,
/// one 1d node per fracture, one 0d node per intersection point; one 2d-1d
/// edge per fracture and one 1d-0d edge per (fracture, point) contact.
MixedDimGraph build_graph(const ProcessedNetwork& pnet, const SplitResult& split,
                          const LowerDecomposition& lower);

/// Pipeline convenience: process + mesh + split + extract + graph + mortars.
MixedDimGraph build_mixed_grid(const FractureNetwork2& net, const MeshSizeParams& params,
                               int lower_refinement = 1, std::uint64_t seed = 0);

/// Same pipeline, starting from an externally provided tagged 2d grid (e.g.
/// an imported MSH mesh).
MixedDimGraph build_mixed_grid_from(const FractureNetwork2& net, const Grid& tagged_2d,
                                    int lower_refinement = 1);

}  // namespace dfm
