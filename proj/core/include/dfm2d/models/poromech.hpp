#pragma once

#include "dfm2d/contact.hpp"
#include "dfm2d/coupling.hpp"
#include "dfm2d/dof_manager.hpp"
#include "dfm2d/models/flow.hpp"
#include "dfm2d/mpsa.hpp"
#include "dfm2d/newton.hpp"

namespace dfm {

/// Data for poroelasticity with frictional fracture contact. Fractures must
/// be non-intersecting (the graph may not contain 0d subdomains).
struct PoromechPhysics {
    FlowPhysics flow;          // pressure parameters, bc, interface data
    MechanicsParameters mech;  // matrix cells plus contact constants
    VectorBC mech_bc;          // matrix grid; wall faces must be Dirichlet
    Vec mech_bc_values;        // 2*nf, outer boundary entries (walls filled internally)
    double theta_frac = 1e-6;  // fracture storage
    double alpha_frac = 1.0;   // fracture Biot coefficient in the stress balance
    double dt = 1.0;
    bool steady = false;       // drop all time-derivative terms (equilibrium solve)
    std::vector<Vec> injection;  // per node id: volumetric rate density per cell
};

/// Simple builder: isotropic elastic matrix, uniform flow data, outer
/// boundary classifiers for mechanics and flow; every fracture wall becomes
/// a Dirichlet (mortar displacement) face for mechanics and a Neumann
/// (mortar flux) face for flow.
using MechOuterBC = std::function<void(const Vec2& x, std::array<BC, 2>& kind, Vec2& value)>;
PoromechPhysics make_poromech_physics(const MixedDimGraph& g, double matrix_k,
                                      const std::vector<FracturePhysics>& fracs,
                                      const OuterBC& flow_outer, const MechanicsParameters& mech,
                                      const MechOuterBC& mech_outer, double dt);

/// Monolithic residual/Jacobian of one implicit Euler step of the Biot
/// system with contact on the fracture interfaces. Unknowns: matrix
/// displacement and pressure, fracture pressure and contact traction
/// (tangential, normal), interface Darcy flux and mortar displacement.
class PoromechSystem : public NonlinearSystem {
public:
    PoromechSystem(const MixedDimGraph& g, const PoromechPhysics& ph);

    int size() const override { return dofs_.size(); }
    void begin_iteration(const Vec& x) override;
    Vec residual(const Vec& x) override;
    SpMat jacobian(const Vec& x) override;
    bool classification_stable() const override { return stable_; }
    std::size_t classification_hash() const override;
    std::vector<std::pair<int, int>> blocks() const override;

    const DofManager& dofs() const { return dofs_; }
    /// Capture time level n (state + boundary data dependent history terms).
    void set_previous(const Vec& x);
    /// Update the outer boundary values (time-dependent conditions).
    void set_mech_bc_values(const Vec& v) { mech_bc_values_ = v; }
    void set_flow_bc_values(int node, const Vec& v) { flow_bc_values_[node] = v; }
    void set_injection(int node, const Vec& rate_density) { injection_[node] = rate_density; }
    void set_steady(bool s) { steady_ = s; }

    Vec node_values(const Vec& x, const std::string& var, int node) const;
    Vec edge_values(const Vec& x, const std::string& var, int edge) const;

    /// Displacement jump per fracture cell (tangential, normal), local frame.
    Eigen::Matrix2Xd jumps(const Vec& x, int frac_node) const;
    std::vector<ContactMode> modes(int frac_node) const;

    const StressDiscretization& stress_discr() const { return mpsa_; }
    /// Assembled mechanics boundary data (outer values + mortar displacement).
    Vec mech_boundary_data(const Vec& x) const;

private:
    const MixedDimGraph& g_;
    const PoromechPhysics& ph_;
    DofManager dofs_;
    StressDiscretization mpsa_;
    std::vector<FluxDiscretization> flow_discr_;  // per node (dim >= 1)
    std::vector<EdgeFlowOperators> edge_ops_;     // per edge
    SpMat div_vec_, div_h_;
    std::vector<SpMat> jump_op_;   // per edge: (2ncl x 2nm) signed jump operator
    std::vector<SpMat> jump_local_;   // per edge: (2ncl x 2nm), rows (t, n) per cell
    std::vector<SpMat> wall_scatter_;  // per edge: (2nf_h x 2nm) mortar u -> wall Dirichlet

    // Precomposed stress-balance row operators per edge: signed wall rows of
    // the traction operators, and the contact-side balance terms.
    struct EdgeMech {
        SpMat wall_rows;              // (2nm x 2nf): signed row selector
        SpMat t_u, t_p;               // wall_rows * stress / grad_p
        std::vector<SpMat> t_um;      // per other edge: wall_rows * bound_stress * scatter
        SpMat bal_sig;                // (2nm x 2nc_l), contact traction part
        SpMat bal_pl;                 // (2nm x nc_l), fracture pressure part
    };
    std::vector<EdgeMech> emech_;

    // time level n data
    Vec prev_;
    Vec vol_prev_;        // MPSA volumetric term at time n
    std::vector<Vec> aperture_prev_, jump_t_prev_;  // per fracture node

    // frozen classification
    std::vector<std::vector<ContactMode>> modes_;      // per fracture node
    std::vector<std::vector<int>> slip_sign_;           // per fracture node
    std::vector<std::vector<char>> aperture_active_;   // max(0, j_n) branch
    std::vector<int> last_classification_;
    bool stable_ = false;
    bool steady_ = false;

    Vec mech_bc_values_;
    std::vector<Vec> flow_bc_values_;
    std::vector<Vec> injection_;

    Vec volumetric(const Vec& x) const;  // div_u + bound + stab composition
    void residual_and_jacobian(const Vec& x, Vec* r, std::vector<Triplet>* ts);
};

/// One time step: returns the Newton report; x is updated in place.
NewtonReport poromech_step(PoromechSystem& sys, Vec& x, const NewtonConfig& cfg);

struct FractureHistory {
    std::vector<double> time;
    std::vector<double> jump_n_norm;  // RMS of normal jump over the fracture
    std::vector<double> jump_t_norm;
    std::vector<int> num_slip, num_open, num_stick;
};

struct PoromechResult {
    std::vector<FractureHistory> fractures;  // per fracture node order
    std::vector<Vec> final_state_per_node_pressure;
    Vec final_state;
    std::vector<double> times;
};

/// Injection-driven scenario: equilibrium initialization, an injection phase
/// with the given rate into one fracture, then a relaxation phase with the
/// well shut. Rejects graphs with intersecting fractures.
PoromechResult run_biot_contact(const MixedDimGraph& g, PoromechPhysics& ph, int inject_fracture,
                                double rate, double t_inject, double t_end,
                                const NewtonConfig& newton = {});

}  // namespace dfm
