#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dfm {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec = Eigen::VectorXd;

SpMat from_triplets(int rows, int cols, const std::vector<Triplet>& ts);

/// Append a sparse block at (row0, col0).
void append_block(std::vector<Triplet>& out, const SpMat& block, int row0, int col0,
                  double scale = 1.0);

/// Signed cell-face divergence operator of a grid: (nc x nf), entry (c, f) =
/// orientation sign. Applying it to face fluxes gives per-cell net outflux.
class Grid;
SpMat divergence(const Grid& g);
/// Vector variant acting on 2-component face quantities: (2nc x 2nf).
SpMat divergence_vec(const Grid& g);

/// Kronecker expansion mapping a scalar operator to one acting on
/// 2-component quantities (interleaved x,y).
SpMat expand_vec(const SpMat& scalar_op);

/// Diagonal sparse matrix from a vector.
SpMat diag(const Vec& d);

/// Restriction matrix selecting a subset of indices: (subset.size() x n).
SpMat restriction(const std::vector<int>& subset, int n);

/// Direct sparse solve (LU). Throws SolverError on structural or numerical
/// singularity, with a hint about the offending pivot location.
Vec linear_solve(const SpMat& a, const Vec& b);

/// Dump a sparse matrix as "row col value" text (diagnostics).
void dump_coo(const SpMat& a, const std::string& path);

}  // namespace dfm
