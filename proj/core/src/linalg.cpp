#include "dfm2d/linalg.hpp"

#include <fstream>

#include <Eigen/SparseLU>

#include "dfm2d/errors.hpp"
#include "dfm2d/grid.hpp"

namespace dfm {

SpMat from_triplets(int rows, int cols, const std::vector<Triplet>& ts)
{
    SpMat m(rows, cols);
    m.setFromTriplets(ts.begin(), ts.end());
    return m;
}

void append_block(std::vector<Triplet>& out, const SpMat& block, int row0, int col0, double scale)
{
    for (int k = 0; k < block.outerSize(); ++k)
        for (SpMat::InnerIterator it(block, k); it; ++it)
            if (it.value() != 0.0)
                out.emplace_back(row0 + static_cast<int>(it.row()),
                                 col0 + static_cast<int>(it.col()), scale * it.value());
}

SpMat divergence(const Grid& g)
{
    std::vector<Triplet> ts;
    for (int c = 0; c < g.num_cells(); ++c)
        for (int i = g.cell_face_ptr[c]; i < g.cell_face_ptr[c + 1]; ++i)
            ts.emplace_back(c, g.cell_faces[i], static_cast<double>(g.cell_face_sign[i]));
    return from_triplets(g.num_cells(), g.num_faces(), ts);
}

SpMat divergence_vec(const Grid& g)
{
    return expand_vec(divergence(g));
}

SpMat expand_vec(const SpMat& s)
{
    std::vector<Triplet> ts;
    ts.reserve(2 * s.nonZeros());
    for (int k = 0; k < s.outerSize(); ++k)
        for (SpMat::InnerIterator it(s, k); it; ++it)
            for (int d = 0; d < 2; ++d)
                ts.emplace_back(2 * static_cast<int>(it.row()) + d,
                                2 * static_cast<int>(it.col()) + d, it.value());
    return from_triplets(2 * static_cast<int>(s.rows()), 2 * static_cast<int>(s.cols()), ts);
}

SpMat diag(const Vec& d)
{
    std::vector<Triplet> ts;
    for (int i = 0; i < d.size(); ++i) ts.emplace_back(i, i, d(i));
    return from_triplets(static_cast<int>(d.size()), static_cast<int>(d.size()), ts);
}

SpMat restriction(const std::vector<int>& subset, int n)
{
    std::vector<Triplet> ts;
    for (std::size_t i = 0; i < subset.size(); ++i)
        ts.emplace_back(static_cast<int>(i), subset[i], 1.0);
    return from_triplets(static_cast<int>(subset.size()), n, ts);
}

Vec linear_solve(const SpMat& a, const Vec& b)
{
    if (a.rows() != a.cols()) throw SolverError("linear_solve: matrix is not square");
    if (a.rows() != b.size()) throw SolverError("linear_solve: size mismatch");
    // Ruiz equilibration; assembled systems mix blocks of very different
    // physical scales (moduli vs transmissibilities vs NCP constants).
    SpMat ac = a;
    ac.makeCompressed();
    const int n = static_cast<int>(ac.rows());
    Vec rs = Vec::Ones(n), cs = Vec::Ones(n);
    for (int pass = 0; pass < 6; ++pass) {
        Vec rmax = Vec::Zero(n), cmax = Vec::Zero(n);
        for (int k = 0; k < ac.outerSize(); ++k)
            for (SpMat::InnerIterator it(ac, k); it; ++it) {
                const double v = std::abs(it.value());
                rmax(it.row()) = std::max(rmax(it.row()), v);
                cmax(it.col()) = std::max(cmax(it.col()), v);
            }
        if (pass == 0)
            for (int i = 0; i < n; ++i)
                if (rmax(i) <= 0 || cmax(i) <= 0)
                    throw SolverError("linear_solve: empty row or column "
                                      + std::to_string(i));
        for (int i = 0; i < n; ++i) {
            rmax(i) = rmax(i) > 0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
            cmax(i) = cmax(i) > 0 ? 1.0 / std::sqrt(cmax(i)) : 1.0;
        }
        for (int k = 0; k < ac.outerSize(); ++k)
            for (SpMat::InnerIterator it(ac, k); it; ++it)
                it.valueRef() *= rmax(it.row()) * cmax(it.col());
        rs = rs.cwiseProduct(rmax);
        cs = cs.cwiseProduct(cmax);
    }

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(ac);
    lu.factorize(ac);
    if (lu.info() != Eigen::Success)
        throw SolverError("linear_solve: singular matrix (" + lu.lastErrorMessage() + ")");

    // Probe for numerical singularity that slipped past the factorization
    // (tiny pivots): a deterministic pseudo-random rhs must be reproduced.
    Vec probe(b.size());
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < probe.size(); ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        probe(i) = static_cast<double>(state >> 11) / static_cast<double>(1ULL << 53) - 0.5;
    }
    auto refined_solve = [&](const Vec& rhs) {
        Vec y = lu.solve(rhs);
        for (int it = 0; it < 2; ++it) y += lu.solve(Vec(rhs - ac * y));
        return y;
    };

    const Vec xp = refined_solve(probe);
    const double res = (ac * xp - probe).norm() / probe.norm();
    if (!(res < 1e-6))
        throw SolverError("linear_solve: matrix is numerically singular (probe residual "
                          + std::to_string(res) + ")");

    Vec x = refined_solve(Vec(rs.cwiseProduct(b)));
    if (lu.info() != Eigen::Success) throw SolverError("linear_solve: back substitution failed");
    return cs.cwiseProduct(x);
}

void dump_coo(const SpMat& a, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out.precision(17);
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace dfm
