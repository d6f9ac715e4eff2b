#pragma once

#include <vector>

#include "dfm2d/fracture_network.hpp"
#include "dfm2d/grid.hpp"

namespace dfm {

/// One fracture face after splitting: the two one-sided wall faces.
/// The plus face is the wall whose cell lies on the positive side of the
/// fracture normal (tangent rotated +90 degrees); its outward normal points
/// from the matrix toward the fracture.
struct WallPair {
    int fracture;
    int plus_face, minus_face;  // face ids in the split 2d grid
};

struct SplitResult {
    Grid grid;  // 2d grid with duplicated wall faces and sector-split nodes
    std::vector<WallPair> pairs;
};

/// Duplicate every tagged interior fracture face into two boundary-like wall
/// faces and split fracture nodes into one copy per wedge sector. Tagged
/// faces on the global boundary are rejected.
SplitResult split_fracture_faces(const Grid& g);

/// Lower-dimensional decomposition extracted from a split 2d grid.
struct LowerDecomposition {
    struct FractureGrid {
        int fracture;
        Grid grid;                       // 1d, possibly refined w.r.t. the walls
        std::vector<WallPair> pairs;     // ordered along the fracture
        std::vector<double> breakpoints; // arc-length stations of the wall cells (pairs.size()+1)
        Vec2 tangent, normal;            // fracture frame; normal = tangent rotated +90
        double arc_origin_offset = 0;    // parameter of breakpoints[0] along tangent
        int refinement = 1;              // 1d cells per wall cell
        // 1d faces at network points: (pnet point id, faces): one face for an
        // endpoint contact, two (split) faces when the fracture crosses the point
        struct PointContact {
            int point;
            std::vector<int> faces_1d;
        };
        std::vector<PointContact> point_contacts;
    };
    struct PointGrid {
        int point;  // pnet point id
        Grid grid;  // single 0d cell
    };
    std::vector<FractureGrid> fractures;
    std::vector<PointGrid> points;
};

/// Build 1d grids per fracture (cells matching the wall pairs, refined by
/// `lower_refinement` cells per wall cell) and 0d grids per intersection
/// point. 1d grids are split at interior intersection points so that flux
/// between the two branches is routed through the 0d subdomain. Immersed tip
/// faces are tagged TagTip, endpoints on the outer boundary TagDomainBoundary.
LowerDecomposition extract_lower(const SplitResult& split, const ProcessedNetwork& pnet,
                                 int lower_refinement = 1);

}  // namespace dfm
