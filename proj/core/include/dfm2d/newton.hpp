#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dfm2d/linalg.hpp"

namespace dfm {

struct NewtonConfig {
    double tol = 1e-6;              // scaled residual tolerance per block
    int max_iter = 40;
    double divergence_factor = 1e6; // abort when the residual grows this much
    int patience = 4;               // consecutive growth steps before abort
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
    std::string failure;
};

/// Residual/Jacobian interface for Newton's method. For semi-smooth systems,
/// begin_iteration re-classifies the active branches at the current state and
/// classification_stable reports whether the classification repeated, which
/// is required on top of the residual test.
class NonlinearSystem {
public:
    virtual ~NonlinearSystem() = default;
    virtual int size() const = 0;
    virtual void begin_iteration(const Vec& x) { (void)x; }
    virtual Vec residual(const Vec& x) = 0;
    virtual SpMat jacobian(const Vec& x) = 0;
    virtual bool classification_stable() const { return true; }
    /// Hash of the current branch classification, for cycle detection.
    virtual std::size_t classification_hash() const { return 0; }
    /// Disjoint index ranges used for per-block residual scaling; default:
    /// the whole vector as one block.
    virtual std::vector<std::pair<int, int>> blocks() const { return {{0, size()}}; }
};

/// Scaled residual: max over blocks of ||r_block||_2 / sqrt(block size),
/// normalized by a per-block reference magnitude (1 if the block never had
/// any signal).
double scaled_residual(const NonlinearSystem& sys, const Vec& r);

NewtonReport newton_solve(NonlinearSystem& sys, Vec& x, const NewtonConfig& cfg = {});

/// Central finite-difference directional derivative of the residual,
/// (r(x + eps dx) - r(x - eps dx)) / (2 eps), for Jacobian verification.
Vec fd_directional(NonlinearSystem& sys, const Vec& x, const Vec& dx, double eps);

/// Max relative error between J*dx and the finite-difference directional
/// derivative over a set of random directions.
double jacobian_fd_error(NonlinearSystem& sys, const Vec& x, int num_dirs = 3,
                         double eps = 1e-6, std::uint64_t seed = 0);

}  // namespace dfm
