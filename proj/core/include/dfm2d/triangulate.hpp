#pragma once

#include <cstdint>

#include "dfm2d/fracture_network.hpp"
#include "dfm2d/grid.hpp"

namespace dfm {

/// Target edge lengths for mesh generation.
struct MeshSizeParams {
    double h_min = 1e-6;   // hard lower bound on resolvable detail
    double h_frac = 0.1;   // target size along fractures
    double h_bound = 0.1;  // target size at the domain boundary / far field

    void validate() const;
    MeshSizeParams scaled(double factor) const
    {
        return {h_min, h_frac * factor, h_bound * factor};
    }
};

/// Conforming constrained Delaunay triangulation of the domain rectangle.
///
/// Every sub-segment of the processed network becomes a union of mesh edges,
/// tagged with the owning fracture id. Interior points are placed on a graded
/// quadtree lattice with a small deterministic jitter controlled by seed, so
/// different seeds give different mesh realizations of the same geometry.
Grid triangulate(const ProcessedNetwork& pnet, const MeshSizeParams& params,
                 std::uint64_t seed = 0);

}  // namespace dfm
