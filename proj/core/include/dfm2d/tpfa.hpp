#pragma once

#include "dfm2d/bc.hpp"
#include "dfm2d/fv_params.hpp"
#include "dfm2d/linalg.hpp"

namespace dfm {

/// Discrete operator bundle for scalar diffusion.
///
/// Face fluxes (total, along the stored face normal) are
///   q = flux * p + bound_flux * g,
/// face pressures (traces) are
///   pi = trace_cell * p + trace_bound * g,
/// where g holds boundary data per face: pressure on Dirichlet faces, total
/// outward flux on Neumann faces (fracture walls receive mortar fluxes this
/// way). Dirichlet faces reproduce their value exactly in the trace.
struct FluxDiscretization {
    SpMat flux;         // nf x nc
    SpMat bound_flux;   // nf x nf
    SpMat trace_cell;   // nf x nc
    SpMat trace_bound;  // nf x nf
};

/// Half transmissibilities per face and side slot (aligned with face_cells),
/// viscosity not included: t = |f| * n.K.d / (d.d).
Eigen::Matrix2Xd half_transmissibilities(const Grid& g, const TensorField& perm);

/// Two-point flux approximation. Face transmissibility is the harmonic mean
/// of the two mobility-scaled half transmissibilities; traces follow from the
/// one-sided flux balance.
FluxDiscretization tpfa(const Grid& g, const FlowParameters& p, const ScalarBC& bc);

/// Sparse upwind advection operator: given signed face fluxes, the advective
/// face flux is flux * (upstream cell concentration), with inflow boundary
/// faces taking their value from the bc data vector:
///   adv_flux = adv * c + bound_adv * c_bc.
struct UpwindDiscretization {
    SpMat adv;        // nf x nc
    SpMat bound_adv;  // nf x nf
};
UpwindDiscretization upwind(const Grid& g, const Vec& face_flux, const ScalarBC& bc);

/// Lumped accumulation operator: diagonal entries coeff * cell measure.
SpMat mass_matrix(const Grid& g, const Vec& coeff);

}  // namespace dfm
