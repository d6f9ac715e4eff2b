#include "dfm2d/mpfa.hpp"

#include <vector>

#include "dfm2d/errors.hpp"

namespace dfm {

namespace {

// Node -> incident faces, from face_nodes.
std::vector<std::vector<int>> node_faces(const Grid& g)
{
    std::vector<std::vector<int>> nf(g.num_nodes());
    for (int f = 0; f < g.num_faces(); ++f)
        for (int n : g.face_nodes[f])
            if (n >= 0) nf[n].push_back(f);
    return nf;
}

}  // namespace

FluxDiscretization mpfa(const Grid& g, const FlowParameters& p, const ScalarBC& bc)
{
    if (g.dim == 1) return tpfa(g, p, bc);
    if (g.dim != 2) throw Error("mpfa: needs a 1d or 2d grid");
    bc.validate(g);

    const int nf = g.num_faces();
    const int nc = g.num_cells();
    const auto nfaces = node_faces(g);

    std::vector<Triplet> flux_t, bflux_t, tc_t, tb_t;
    // Every face has two sub-faces (one per endpoint vertex); the trace is
    // the average of the two sub-face reconstructions.
    std::vector<double> trace_weight(nf, 0.0);

    Eigen::VectorXd inv_mu = p.viscosity.cwiseInverse();

    for (int v = 0; v < g.num_nodes(); ++v) {
        const auto& vfaces = nfaces[v];
        if (vfaces.empty()) continue;

        // Local cells of the interaction region.
        std::vector<int> cells;
        for (int f : vfaces)
            for (int c : g.face_cells[f])
                if (c >= 0 && std::find(cells.begin(), cells.end(), c) == cells.end())
                    cells.push_back(c);
        const int m = static_cast<int>(cells.size());
        if (m == 0) continue;
        auto local_cell = [&](int c) {
            return static_cast<int>(std::find(cells.begin(), cells.end(), c) - cells.begin());
        };

        const int nu = 2 * m;  // cell gradient unknowns
        const int nloc_f = static_cast<int>(vfaces.size());
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nu, nu);
        Eigen::MatrixXd rhs_p = Eigen::MatrixXd::Zero(nu, m);
        Eigen::MatrixXd rhs_g = Eigen::MatrixXd::Zero(nu, nloc_f);

        int row = 0;
        for (int lf = 0; lf < nloc_f; ++lf) {
            const int f = vfaces[lf];
            const Vec2 n = g.face_normals.col(f);
            const Vec2 xf = g.face_centers.col(f);
            const int c0 = g.face_cells[f][0], c1 = g.face_cells[f][1];
            if (c0 >= 0 && c1 >= 0) {
                const int a0 = local_cell(c0), a1 = local_cell(c1);
                const Vec2 w0 = (p.permeability.tensor(c0) * inv_mu(c0)).transpose() * n;
                const Vec2 w1 = (p.permeability.tensor(c1) * inv_mu(c1)).transpose() * n;
                // Flux continuity along n.
                a.block<1, 2>(row, 2 * a0) = w0.transpose();
                a.block<1, 2>(row, 2 * a1) = -w1.transpose();
                ++row;
                // Pressure continuity at the face center.
                const Vec2 d0 = xf - g.cell_centers.col(c0);
                const Vec2 d1 = xf - g.cell_centers.col(c1);
                a.block<1, 2>(row, 2 * a0) = d0.transpose();
                a.block<1, 2>(row, 2 * a1) = -d1.transpose();
                rhs_p(row, a0) = -1.0;
                rhs_p(row, a1) = 1.0;
                ++row;
            } else {
                const int c = g.boundary_cell(f);
                const int ac = local_cell(c);
                const int s = g.face_sign(f, c);
                if (bc.is_dir(f)) {
                    const Vec2 d = xf - g.cell_centers.col(c);
                    a.block<1, 2>(row, 2 * ac) = d.transpose();
                    rhs_p(row, ac) = -1.0;
                    rhs_g(row, lf) = 1.0;
                    ++row;
                } else {
                    // Outward flux density equals g_f / |f|:
                    //   -(s n).(K/mu) grad = g_f / |f|
                    const Vec2 w = (p.permeability.tensor(c) * inv_mu(c)).transpose() * n;
                    a.block<1, 2>(row, 2 * ac) = -(s * w).transpose();
                    rhs_g(row, lf) = 1.0 / g.face_measures(f);
                    ++row;
                }
            }
        }
        if (row != nu)
            throw Error("mpfa: interaction region at vertex " + std::to_string(v)
                        + " is not square");

        // Row equilibration: flux rows scale with K, continuity rows with h.
        for (int rr = 0; rr < nu; ++rr) {
            const double m = a.row(rr).cwiseAbs().maxCoeff();
            if (m <= 0)
                throw Error("mpfa: singular interaction system at vertex " + std::to_string(v));
            a.row(rr) /= m;
            rhs_p.row(rr) /= m;
            rhs_g.row(rr) /= m;
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible())
            throw Error("mpfa: singular interaction system at vertex " + std::to_string(v));
        const Eigen::MatrixXd sol_p = lu.solve(rhs_p);   // gradients per cell pressure
        const Eigen::MatrixXd sol_g = lu.solve(rhs_g);   // gradients per boundary value

        // Scatter sub-face fluxes and traces.
        for (int lf = 0; lf < nloc_f; ++lf) {
            const int f = vfaces[lf];
            const Vec2 n = g.face_normals.col(f);
            const Vec2 xf = g.face_centers.col(f);
            const double half = 0.5 * g.face_measures(f);
            const int c0 = g.face_cells[f][0];
            const int cref = c0 >= 0 ? c0 : g.boundary_cell(f);
            const int ar = local_cell(cref);
            const Vec2 w = (p.permeability.tensor(cref) * inv_mu(cref)).transpose() * n;

            const bool neumann = g.is_boundary_face(f) && bc.is_neu(f);
            if (neumann) {
                // Imposed flux: half of the total outward flux per sub-face.
                const int s = g.face_sign(f, g.boundary_cell(f));
                bflux_t.emplace_back(f, f, 0.5 * s);
            } else {
                // Flux along n from the reference-cell gradient.
                for (int j = 0; j < m; ++j) {
                    const double val = -half * w.dot(sol_p.block<2, 1>(2 * ar, j));
                    if (val != 0.0) flux_t.emplace_back(f, cells[j], val);
                }
                for (int lg = 0; lg < nloc_f; ++lg) {
                    const double val = -half * w.dot(sol_g.block<2, 1>(2 * ar, lg));
                    if (val != 0.0) bflux_t.emplace_back(f, vfaces[lg], val);
                }
            }

            // Trace at the face center from the reference cell, averaged
            // over the two sub-faces.
            trace_weight[f] += 0.5;
            const Vec2 d = xf - g.cell_centers.col(cref);
            tc_t.emplace_back(f, cref, 0.5);
            for (int j = 0; j < m; ++j) {
                const double val = 0.5 * d.dot(sol_p.block<2, 1>(2 * ar, j));
                if (val != 0.0) tc_t.emplace_back(f, cells[j], val);
            }
            for (int lg = 0; lg < nloc_f; ++lg) {
                const double val = 0.5 * d.dot(sol_g.block<2, 1>(2 * ar, lg));
                if (val != 0.0) tb_t.emplace_back(f, vfaces[lg], val);
            }
        }
    }

    FluxDiscretization d;
    d.flux = from_triplets(nf, nc, flux_t);
    d.bound_flux = from_triplets(nf, nf, bflux_t);
    d.trace_cell = from_triplets(nf, nc, tc_t);
    d.trace_bound = from_triplets(nf, nf, tb_t);
    return d;
}

}  // namespace dfm
