#pragma once

#include "dfm2d/models/analytic.hpp"
#include "dfm2d/models/flow.hpp"
#include "dfm2d/models/poromech.hpp"

namespace dfm {

struct ConvergenceTable {
    std::vector<double> h;
    std::vector<double> errors;
    double rate = 0.0;  // least-squares slope of log err vs log h
};

/// Least-squares observed order from (h, err) pairs; throws on fewer than
/// two valid entries, reports 0 when all errors vanish.
double lsq_rate(const std::vector<double>& h, const std::vector<double>& err);

/// Reconstructed benchmark network: unit square with conductive and blocking
/// fractures, crossings, a T contact and an isolated fracture. The pressure
/// profile line (0,0.5)-(1,0.9) crosses a blocking fracture.
FractureNetwork2 benchmark_network();
std::vector<FracturePhysics> benchmark_fracture_physics();
FlowPhysics benchmark_physics(const MixedDimGraph& g);

struct FlowBenchmarkResult {
    ConvergenceTable matrix, fracture;
    std::vector<double> profile_s;  // arc-length positions along the line
    Vec profile;                    // finest-level pressure samples
    int finest_cells = 0;
};

/// Mesh sequence h0 / 2^l for l = 0..levels-1, errors against a reference
/// solution computed with Mpfa on one further refinement.
FlowBenchmarkResult run_flow_benchmark(Scheme scheme, int levels, double h0,
                                       std::uint64_t seed = 0);

/// Pressurized-crack problem: Mpsa with analytic far-field Dirichlet data;
/// returns the relative L2 error of the normal jump against the closed form.
double run_sneddon_once(const SneddonConfig& cfg, const Rect& domain,
                        const MeshSizeParams& mp, std::uint64_t seed);

/// Averaged study over angles and mesh realizations per refinement level.
ConvergenceTable sneddon_study(const std::vector<double>& angles_deg, int realizations,
                               int levels, double h0, std::uint64_t seed = 0);

struct MandelRun {
    std::vector<double> times;
    std::vector<double> p_err_rel, ux_err_rel;
    std::vector<Vec> p_profiles;   // per sample time, per cell
    std::vector<Vec> ux_profiles;
    int num_cells = 0;
    double mandel_cryer_peak = 0;  // max over time of p(near 0) / p(0+)
};

/// Biot consolidation on the quarter domain with the analytic time-dependent
/// top displacement; errors are relative L2 over cell centers.
MandelRun run_mandel(const MandelConfig& cfg, double h, double dt,
                     const std::vector<double>& sample_times);

/// Manufactured smooth solution, TPFA on a sequence of equilateral lattices:
/// observed cell-center convergence (superconvergent, about order 2).
ConvergenceTable manufactured_tpfa_study(int levels, int n0);

}  // namespace dfm
