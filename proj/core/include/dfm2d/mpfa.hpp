#pragma once

#include "dfm2d/tpfa.hpp"

namespace dfm {

/// Multi-point flux approximation (O-method) on simplicial 2d grids, with
/// pressure and flux continuity enforced per vertex interaction region and
/// continuity points at face centers. Exact for cell-wise linear pressure
/// with constant permeability; reduces to two-point stencils on K-orthogonal
/// grids. 1d grids fall back to tpfa, which is exact there.
FluxDiscretization mpfa(const Grid& g, const FlowParameters& p, const ScalarBC& bc);

}  // namespace dfm
