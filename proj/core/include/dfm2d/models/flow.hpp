#pragma once

#include <functional>

#include "dfm2d/coupling.hpp"
#include "dfm2d/dof_manager.hpp"
#include "dfm2d/mpfa.hpp"

namespace dfm {

enum class Scheme { Tpfa, Mpfa };

/// Classifies an outer-boundary point: condition kind plus value (pressure
/// for Dirichlet, outward flux density for Neumann).
using OuterBC = std::function<std::pair<BC, double>(const Vec2&)>;

/// Per-fracture flow data: tangential and normal permeability and aperture.
/// The 1d subdomain gets the aperture-scaled tangential permeability k_t * a;
/// the matrix-fracture interface conductivity is kappa = 2 k_n / a.
struct FracturePhysics {
    double k_t = 1.0;
    double k_n = 1.0;
    double aperture = 1e-3;
};

/// Assembled per-entity flow data for a mixed-dimensional graph.
struct FlowPhysics {
    std::vector<FlowParameters> params;  // per node
    std::vector<ScalarBC> bc;            // per node
    std::vector<Vec> bc_values;          // per node, zero on interface faces
    std::vector<Vec> resistance;         // per edge (mortar cells)
    std::vector<Vec> weight;             // per edge
    double viscosity = 1.0;
};

/// Build uniform physics: isotropic matrix permeability, per-fracture data,
/// outer boundary classification. Intersection (0d) interface conductivity
/// uses the harmonic average of the incident fractures' normal
/// permeabilities over the mean aperture.
FlowPhysics make_flow_physics(const MixedDimGraph& g, double matrix_k,
                              const std::vector<FracturePhysics>& fracs, const OuterBC& outer,
                              double viscosity = 1.0);

struct FlowResult {
    std::vector<Vec> pressure;     // per node
    std::vector<Vec> mortar_flux;  // per edge, extensive, positive high -> low
    std::vector<Vec> face_flux;    // per node, total face fluxes
    std::vector<Vec> bound_data;   // per node, bc values plus scattered mortar data
    std::vector<FluxDiscretization> discr;  // per node (empty for 0d)
};

/// Steady incompressible flow on the mixed-dimensional graph: subdomain
/// conservation plus Robin interface laws, solved monolithically.
FlowResult run_flow(const MixedDimGraph& g, const FlowPhysics& phys,
                    Scheme scheme = Scheme::Mpfa);

/// Largest per-cell conservation violation over all subdomains, scaled by
/// the largest flux magnitude: |net outflux - source - mortar exchange|.
double conservation_violation(const MixedDimGraph& g, const FlowPhysics& phys,
                              const FlowResult& r);

/// Piecewise-constant matrix pressure sampled along a line (n points).
Vec sample_matrix_pressure(const MixedDimGraph& g, const FlowResult& r, const Vec2& a,
                           const Vec2& b, int n);

}  // namespace dfm
