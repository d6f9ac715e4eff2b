#pragma once

#include <Eigen/Sparse>

#include "dfm2d/split.hpp"

namespace dfm {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Interface mesh between a higher- and a lower-dimensional subdomain, with
/// lowest-order projection operators built from cell overlaps.
///
/// Mortar cells are grouped by side: a 2d-1d interface has two sides (plus
/// and minus fracture wall), a 1d-0d interface one side per fracture branch
/// at the point. Side s occupies mortar cells [s*cells_per_side,
/// (s+1)*cells_per_side).
///
/// Projections come in two flavors per direction. The averaging (intensive)
/// maps have rows that are convex combinations; the integrating (extensive)
/// maps preserve totals. They are mutual transposes across directions:
///   to_secondary_int = secondary_avg^T,  to_secondary_avg = secondary_int^T
/// and likewise for the primary pair. Operators are indexed globally: the
/// primary side by faces of the higher grid, the secondary side by cells of
/// the lower grid.
struct MortarGrid {
    int num_sides = 2;
    int cells_per_side = 0;
    Eigen::VectorXd cell_measures;

    SpMat primary_avg;       // (nm x nf_high): wall-face values -> mortar
    SpMat primary_int;       //   conserving variant
    SpMat to_primary_avg;    // (nf_high x nm)
    SpMat to_primary_int;
    SpMat secondary_avg;     // (nm x nc_low): lower-cell values -> mortar
    SpMat secondary_int;
    SpMat to_secondary_avg;  // (nc_low x nm)
    SpMat to_secondary_int;

    int num_cells() const { return num_sides * cells_per_side; }
    int side_of(int m) const { return m / cells_per_side; }

    /// Signature of each side in jump/sum operators: +1 for side 0 (plus),
    /// -1 for side 1.
    double side_sign(int m) const { return side_of(m) == 0 ? 1.0 : -1.0; }
};

/// Mortar for a 2d-1d interface. Mortar cells coincide with the wall-cell
/// intervals (one copy per side); the lower grid may be refined by an integer
/// ratio relative to those intervals. Overlaps are computed by 1d interval
/// intersection, so any nested or non-nested partition of the same curve
/// works. Throws GeometryError when the two partitions do not cover the same
/// extent (within tol).
MortarGrid build_mortar(const LowerDecomposition::FractureGrid& fg, int num_faces_high,
                        double tol);

/// Mortar for a 1d-0d interface: one mortar cell (the point) per branch.
MortarGrid build_point_mortar(const std::vector<int>& branch_faces_1d, int num_faces_1d);

}  // namespace dfm
