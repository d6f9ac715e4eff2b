#include "dfm2d/mdgraph.hpp"

#include "dfm2d/errors.hpp"

namespace dfm {

int MixedDimGraph::add_node(int dim, Grid g)
{
    const int id = num_nodes();
    SubdomainNode n;
    n.id = id;
    n.dim = dim;
    n.grid = std::move(g);
    nodes.push_back(std::move(n));
    return id;
}

int MixedDimGraph::add_edge(int high, int low, MortarGrid m)
{
    if (high < 0 || high >= num_nodes() || low < 0 || low >= num_nodes())
        throw GeometryError("add_edge: unknown node");
    if (nodes[high].dim != nodes[low].dim + 1)
        throw GeometryError("add_edge: subdomains must be exactly one dimension apart");
    const int id = num_edges();
    InterfaceEdge e;
    e.id = id;
    e.high = high;
    e.low = low;
    e.mortar = std::move(m);
    edges.push_back(std::move(e));
    return id;
}

NeighborSplit MixedDimGraph::sorted_neighbors(int node) const
{
    if (node < 0 || node >= num_nodes()) throw GeometryError("sorted_neighbors: unknown node");
    NeighborSplit out;
    for (const auto& e : edges) {
        if (e.low == node) out.higher.push_back(e.id);
        if (e.high == node) out.lower.push_back(e.id);
    }
    return out;
}

MixedDimGraph build_graph(const ProcessedNetwork& pnet, const SplitResult& split,
                          const LowerDecomposition& lower)
{
    MixedDimGraph g;
    g.matrix_node = g.add_node(2, split.grid);

    if (static_cast<int>(lower.fractures.size()) != pnet.num_fractures)
        throw GeometryError("build_graph: missing 1d grid for a fracture subdomain");

    g.fracture_nodes.resize(pnet.num_fractures, -1);
    for (const auto& fg : lower.fractures) {
        const int nid = g.add_node(1, fg.grid);
        g.nodes[nid].fracture = fg.fracture;
        g.fracture_nodes[fg.fracture] = nid;
    }
    for (const auto& pg : lower.points) {
        const int nid = g.add_node(0, pg.grid);
        g.nodes[nid].pnet_point = pg.point;
        g.point_nodes[pg.point] = nid;
    }

    // 2d-1d edges, one per fracture.
    const int nf_high = split.grid.num_faces();
    for (const auto& fg : lower.fractures) {
        MortarGrid m = build_mortar(fg, nf_high, pnet.tol);
        const int eid = g.add_edge(g.matrix_node, g.fracture_nodes[fg.fracture], std::move(m));
        g.edges[eid].fracture = fg.fracture;
        g.edges[eid].pairs = fg.pairs;
        g.edges[eid].tangent = fg.tangent;
        g.edges[eid].normal = fg.normal;
    }

    // 1d-0d edges, one per (fracture, intersection point) contact.
    for (const auto& fg : lower.fractures) {
        for (const auto& pc : fg.point_contacts) {
            auto it = g.point_nodes.find(pc.point);
            if (it == g.point_nodes.end())
                throw GeometryError("build_graph: missing 0d grid for intersection point "
                                    + std::to_string(pc.point));
            MortarGrid m = build_point_mortar(pc.faces_1d, fg.grid.num_faces());
            const int eid =
                g.add_edge(g.fracture_nodes[fg.fracture], it->second, std::move(m));
            g.edges[eid].pnet_point = pc.point;
            g.edges[eid].fracture = fg.fracture;
        }
    }
    return g;
}

MixedDimGraph build_mixed_grid(const FractureNetwork2& net, const MeshSizeParams& params,
                               int lower_refinement, std::uint64_t seed)
{
    const ProcessedNetwork pnet = process_network(net);
    const Grid g2 = triangulate(pnet, params, seed);
    const SplitResult split = split_fracture_faces(g2);
    const LowerDecomposition lower = extract_lower(split, pnet, lower_refinement);
    return build_graph(pnet, split, lower);
}

MixedDimGraph build_mixed_grid_from(const FractureNetwork2& net, const Grid& tagged_2d,
                                    int lower_refinement)
{
    const ProcessedNetwork pnet = process_network(net);
    const SplitResult split = split_fracture_faces(tagged_2d);
    const LowerDecomposition lower = extract_lower(split, pnet, lower_refinement);
    return build_graph(pnet, split, lower);
}

}  // namespace dfm
