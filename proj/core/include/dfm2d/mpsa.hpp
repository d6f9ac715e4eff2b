#pragma once

#include "dfm2d/bc.hpp"
#include "dfm2d/fv_params.hpp"
#include "dfm2d/linalg.hpp"

namespace dfm {

/// Discrete operator bundle for (poro)elasticity.
///
/// Face tractions (total, 2 components per face, measured along the stored
/// face normal) are
///   T = stress * u + bound_stress * g + grad_p * p,
/// where u holds cell displacements (interleaved x,y), g boundary data per
/// face component (displacement for Dirichlet, total outward traction for
/// Neumann) and p cell pressures entering through the Biot term -alpha p I.
///
/// The volumetric coupling per cell, int_dK u.n, splits the same way:
///   div_u * u + bound_div_u * g + stabilization * p;
/// stabilization is the pressure-induced part, which stabilizes the mass
/// balance in the time-discrete Biot system.
///
/// trace_cell / trace_bound reconstruct face displacements.
struct StressDiscretization {
    SpMat stress;         // 2nf x 2nc
    SpMat bound_stress;   // 2nf x 2nf
    SpMat grad_p;         // 2nf x nc
    SpMat div_u;          // nc x 2nc
    SpMat bound_div_u;    // nc x 2nf
    SpMat stabilization;  // nc x nc
    SpMat trace_cell;     // 2nf x 2nc
    SpMat trace_bound;    // 2nf x 2nf
};

/// Multi-point stress approximation (O-method) on simplicial 2d grids with
/// cell-wise gradients, traction and displacement continuity per vertex
/// region, and continuity points at face centers. Exact for linear
/// displacement fields, including rigid-body modes.
StressDiscretization mpsa(const Grid& g, const MechanicsParameters& m, const VectorBC& bc);

}  // namespace dfm
