#include "dfm2d/mortar.hpp"

#include <algorithm>

#include "dfm2d/errors.hpp"

namespace dfm {

namespace {

SpMat from_triplets(int rows, int cols, const std::vector<Triplet>& ts)
{
    SpMat m(rows, cols);
    m.setFromTriplets(ts.begin(), ts.end());
    return m;
}

}  // namespace

MortarGrid build_mortar(const LowerDecomposition::FractureGrid& fg, int num_faces_high,
                        double tol)
{
    const Grid& g1 = fg.grid;
    const int n_int = static_cast<int>(fg.pairs.size());  // wall intervals per side

    MortarGrid m;
    m.num_sides = 2;
    m.cells_per_side = n_int;
    m.cell_measures.resize(2 * n_int);
    for (int i = 0; i < n_int; ++i) {
        const double len = fg.breakpoints[i + 1] - fg.breakpoints[i];
        m.cell_measures(i) = len;
        m.cell_measures(n_int + i) = len;
    }

    // Higher side: wall faces match mortar cells one-to-one per side.
    std::vector<Triplet> pa, pi;
    for (int i = 0; i < n_int; ++i) {
        pa.emplace_back(i, fg.pairs[i].plus_face, 1.0);
        pa.emplace_back(n_int + i, fg.pairs[i].minus_face, 1.0);
    }
    pi = pa;
    m.primary_avg = from_triplets(2 * n_int, num_faces_high, pa);
    m.primary_int = from_triplets(2 * n_int, num_faces_high, pi);
    m.to_primary_avg = SpMat(m.primary_int.transpose());
    m.to_primary_int = SpMat(m.primary_avg.transpose());

    // Lower side: interval overlaps between mortar cells and 1d cells, in
    // the arc-length parameter used for the breakpoints.
    const int nc_low = g1.num_cells();
    std::vector<double> c_lo(nc_low), c_hi(nc_low);
    double covered = 0;
    for (int c = 0; c < nc_low; ++c) {
        const double mid = fg.tangent.dot(g1.cell_centers.col(c));
        const double half = 0.5 * g1.cell_measures(c);
        c_lo[c] = mid - half;
        c_hi[c] = mid + half;
        covered += g1.cell_measures(c);
    }
    const double extent = fg.breakpoints.back() - fg.breakpoints.front();
    if (std::abs(covered - extent) > std::max(tol, 1e-12 * extent) * 10)
        throw GeometryError("mortar build: lower grid does not cover the interface");

    std::vector<Triplet> sa, si, tsa, tsi;
    for (int i = 0; i < n_int; ++i) {
        const double a = fg.breakpoints[i], b = fg.breakpoints[i + 1];
        for (int c = 0; c < nc_low; ++c) {
            const double o = std::min(b, c_hi[c]) - std::max(a, c_lo[c]);
            if (o <= tol) continue;
            for (int side = 0; side < 2; ++side) {
                const int mc = side * n_int + i;
                sa.emplace_back(mc, c, o / m.cell_measures(mc));
                si.emplace_back(mc, c, o / g1.cell_measures(c));
                tsa.emplace_back(c, mc, o / g1.cell_measures(c));
                tsi.emplace_back(c, mc, o / m.cell_measures(mc));
            }
        }
    }
    m.secondary_avg = from_triplets(2 * n_int, nc_low, sa);
    m.secondary_int = from_triplets(2 * n_int, nc_low, si);
    m.to_secondary_avg = from_triplets(nc_low, 2 * n_int, tsa);
    m.to_secondary_int = from_triplets(nc_low, 2 * n_int, tsi);
    return m;
}

MortarGrid build_point_mortar(const std::vector<int>& branch_faces_1d, int num_faces_1d)
{
    const int ns = static_cast<int>(branch_faces_1d.size());
    if (ns < 1 || ns > 2) throw GeometryError("point mortar needs 1 or 2 branches");
    MortarGrid m;
    m.num_sides = ns;
    m.cells_per_side = 1;
    m.cell_measures = Eigen::VectorXd::Ones(ns);

    std::vector<Triplet> pa;
    for (int s = 0; s < ns; ++s) pa.emplace_back(s, branch_faces_1d[s], 1.0);
    m.primary_avg = from_triplets(ns, num_faces_1d, pa);
    m.primary_int = m.primary_avg;
    m.to_primary_avg = SpMat(m.primary_avg.transpose());
    m.to_primary_int = m.to_primary_avg;

    std::vector<Triplet> sa;
    for (int s = 0; s < ns; ++s) sa.emplace_back(s, 0, 1.0);
    m.secondary_avg = from_triplets(ns, 1, sa);
    m.secondary_int = m.secondary_avg;
    m.to_secondary_avg = SpMat(m.secondary_avg.transpose());
    m.to_secondary_int = m.to_secondary_avg;
    return m;
}

}  // namespace dfm
