#include "dfm2d/mpsa.hpp"

#include <vector>

#include "dfm2d/errors.hpp"

namespace dfm {

namespace {

// Traction rows: T = M * [gxx gxy gyx gyy]^T for sigma = lam tr(G) I
// + mu (G + G^T), evaluated against normal n.
Eigen::Matrix<double, 2, 4> traction_rows(const Vec2& n, double lam, double mu)
{
    Eigen::Matrix<double, 2, 4> m;
    m << lam * n.x() + 2 * mu * n.x(), mu * n.y(), mu * n.y(), lam * n.x(),
         lam * n.y(), mu * n.x(), mu * n.x(), lam * n.y() + 2 * mu * n.y();
    return m;
}

// Displacement rows: u(xbar) - u_c = D * G with D depending on d = xbar - xc.
Eigen::Matrix<double, 2, 4> displacement_rows(const Vec2& d)
{
    Eigen::Matrix<double, 2, 4> m;
    m << d.x(), d.y(), 0, 0,
         0, 0, d.x(), d.y();
    return m;
}

std::vector<std::vector<int>> node_faces(const Grid& g)
{
    std::vector<std::vector<int>> nf(g.num_nodes());
    for (int f = 0; f < g.num_faces(); ++f)
        for (int n : g.face_nodes[f])
            if (n >= 0) nf[n].push_back(f);
    return nf;
}

}  // namespace

StressDiscretization mpsa(const Grid& g, const MechanicsParameters& mp, const VectorBC& bc)
{
    if (g.dim != 2) throw Error("mpsa: needs a 2d grid");
    bc.validate(g);
    mp.validate();

    const int nf = g.num_faces();
    const int nc = g.num_cells();
    const auto nfaces = node_faces(g);
    const double alpha = mp.biot_alpha;

    std::vector<Triplet> stress_t, bstress_t, gradp_t, divu_t, bdivu_t, stab_t, tc_t, tb_t;

    for (int v = 0; v < g.num_nodes(); ++v) {
        const auto& vfaces = nfaces[v];
        if (vfaces.empty()) continue;

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

        const int nu = 4 * m;
        const int nlf = static_cast<int>(vfaces.size());
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nu, nu);
        Eigen::MatrixXd rhs_u = Eigen::MatrixXd::Zero(nu, 2 * m);
        Eigen::MatrixXd rhs_p = Eigen::MatrixXd::Zero(nu, m);
        Eigen::MatrixXd rhs_g = Eigen::MatrixXd::Zero(nu, 2 * nlf);

        int row = 0;
        // Continuity points for interior sub-faces sit a third of the way
        // from the face center toward the vertex; with the plain face-center
        // choice the local systems turn singular on structured grids with
        // collinear face pairs. Boundary sub-faces keep the face center so
        // that face-valued boundary data is imposed exactly.
        const Vec2 xv = g.nodes.col(v);
        for (int lf = 0; lf < nlf; ++lf) {
            const int f = vfaces[lf];
            const Vec2 n = g.face_normals.col(f);
            const Vec2 xf = g.face_centers.col(f);
            const Vec2 xbar = xf + (1.0 / 3.0) * (xv - xf);
            const int c0 = g.face_cells[f][0], c1 = g.face_cells[f][1];
            if (c0 >= 0 && c1 >= 0) {
                const int a0 = local_cell(c0), a1 = local_cell(c1);
                const auto m0 = traction_rows(n, mp.lame_lambda(c0), mp.lame_mu(c0));
                const auto m1 = traction_rows(n, mp.lame_lambda(c1), mp.lame_mu(c1));
                // Poroelastic traction continuity; Biot terms on the rhs.
                a.block<2, 4>(row, 4 * a0) = m0;
                a.block<2, 4>(row, 4 * a1) = -m1;
                rhs_p.block<2, 1>(row, a0) += alpha * n;
                rhs_p.block<2, 1>(row, a1) -= alpha * n;
                row += 2;
                // Displacement continuity at the sub-face continuity point.
                const auto d0 = displacement_rows(xbar - g.cell_centers.col(c0));
                const auto d1 = displacement_rows(xbar - g.cell_centers.col(c1));
                a.block<2, 4>(row, 4 * a0) = d0;
                a.block<2, 4>(row, 4 * a1) = -d1;
                rhs_u(row, 2 * a0) = -1.0;
                rhs_u(row, 2 * a1) = 1.0;
                rhs_u(row + 1, 2 * a0 + 1) = -1.0;
                rhs_u(row + 1, 2 * a1 + 1) = 1.0;
                row += 2;
            } else {
                const int c = g.boundary_cell(f);
                const int ac = local_cell(c);
                const int s = g.face_sign(f, c);
                const auto mt = traction_rows(n, mp.lame_lambda(c), mp.lame_mu(c));
                const auto md = displacement_rows(xf - g.cell_centers.col(c));
                for (int comp = 0; comp < 2; ++comp) {
                    if (bc.is_dir(f, comp)) {
                        a.block<1, 4>(row, 4 * ac) = md.row(comp);
                        rhs_u(row, 2 * ac + comp) = -1.0;
                        rhs_g(row, 2 * lf + comp) = 1.0;
                    } else {
                        // Outward traction density: s (sigma - alpha p I) n.
                        a.block<1, 4>(row, 4 * ac) = s * mt.row(comp);
                        rhs_p(row, ac) = s * alpha * n(comp);
                        rhs_g(row, 2 * lf + comp) = 1.0 / g.face_measures(f);
                    }
                    ++row;
                }
            }
        }
        if (row != nu)
            throw Error("mpsa: interaction region at vertex " + std::to_string(v)
                        + " is not square");

        // Row equilibration: traction rows scale with the moduli, continuity
        // rows with h.
        for (int rr = 0; rr < nu; ++rr) {
            const double m = a.row(rr).cwiseAbs().maxCoeff();
            if (m <= 0)
                throw Error("mpsa: singular interaction system at vertex " + std::to_string(v));
            a.row(rr) /= m;
            rhs_u.row(rr) /= m;
            rhs_p.row(rr) /= m;
            rhs_g.row(rr) /= m;
        }

        Eigen::MatrixXd su, sp, sg;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.isInvertible()) {
            su = lu.solve(rhs_u);
            sp = lu.solve(rhs_p);
            sg = lu.solve(rhs_g);
        } else {
            // All-Neumann regions leave the local rotations undetermined
            // (tractions read only the symmetric gradient), and corner cells
            // with two Neumann faces impose more traction components than a
            // linear displacement carries. The minimum-norm least-squares
            // solution fixes the rotation gauge and reconciles corner data;
            // imposed Neumann tractions enter the operators directly, so the
            // traction outputs are unaffected.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
            su = cod.solve(rhs_u);
            sp = cod.solve(rhs_p);
            sg = cod.solve(rhs_g);
            if (!(su.allFinite() && sp.allFinite() && sg.allFinite()))
                throw Error("mpsa: singular interaction system at vertex "
                            + std::to_string(v));
        }

        // Scatter sub-face tractions, traces and volumetric terms.
        for (int lf = 0; lf < nlf; ++lf) {
            const int f = vfaces[lf];
            const Vec2 n = g.face_normals.col(f);
            const Vec2 xf = g.face_centers.col(f);
            const bool interior = !g.is_boundary_face(f);
            const Vec2 xbar = interior ? Vec2(xf + (1.0 / 3.0) * (xv - xf)) : xf;
            const double half = 0.5 * g.face_measures(f);
            const int c0 = g.face_cells[f][0];
            const int cref = c0 >= 0 ? c0 : g.boundary_cell(f);
            const int ar = local_cell(cref);
            const auto mt = traction_rows(n, mp.lame_lambda(cref), mp.lame_mu(cref));
            const auto md = displacement_rows(xbar - g.cell_centers.col(cref));

            const bool full_neumann = g.is_boundary_face(f) && bc.is_neu(f, 0) && bc.is_neu(f, 1);

            // Traction along the stored normal: half * (mt X - alpha p n).
            if (full_neumann) {
                const int s = g.face_sign(f, g.boundary_cell(f));
                for (int comp = 0; comp < 2; ++comp)
                    bstress_t.emplace_back(2 * f + comp, 2 * f + comp, 0.5 * s);
            } else {
                for (int comp = 0; comp < 2; ++comp) {
                    const int out_row = 2 * f + comp;
                    const Eigen::RowVector4d trow = mt.row(comp);
                    for (int j = 0; j < 2 * m; ++j) {
                        const double val = half * trow.dot(su.block<4, 1>(4 * ar, j));
                        if (val != 0.0)
                            stress_t.emplace_back(out_row, 2 * cells[j / 2] + (j % 2), val);
                    }
                    for (int j = 0; j < m; ++j) {
                        double val = half * trow.dot(sp.block<4, 1>(4 * ar, j));
                        if (cells[j] == cref) val -= half * alpha * n(comp);
                        if (val != 0.0) gradp_t.emplace_back(out_row, cells[j], val);
                    }
                    for (int j = 0; j < 2 * nlf; ++j) {
                        const double val = half * trow.dot(sg.block<4, 1>(4 * ar, j));
                        if (val != 0.0)
                            bstress_t.emplace_back(out_row, 2 * vfaces[j / 2] + (j % 2), val);
                    }
                }
            }

            // Continuity-point displacement: u_cref + G_cref d; used for the
            // face trace (weight 1/2 per sub-face) and the volumetric terms.
            for (int comp = 0; comp < 2; ++comp) {
                const int out_row = 2 * f + comp;
                const Eigen::RowVector4d drow = md.row(comp);
                // cell part: identity on cref plus gradient reconstruction
                tc_t.emplace_back(out_row, 2 * cref + comp, 0.5);
                for (int j = 0; j < 2 * m; ++j) {
                    const double val = 0.5 * drow.dot(su.block<4, 1>(4 * ar, j));
                    if (val != 0.0) tc_t.emplace_back(out_row, 2 * cells[j / 2] + (j % 2), val);
                }
                for (int j = 0; j < 2 * nlf; ++j) {
                    const double val = 0.5 * drow.dot(sg.block<4, 1>(4 * ar, j));
                    if (val != 0.0)
                        tb_t.emplace_back(out_row, 2 * vfaces[j / 2] + (j % 2), val);
                }
            }

            // Volumetric coupling: for each cell adjacent to f, the sub-face
            // contributes sign * half * (u_tilde . n).
            for (int slot = 0; slot < 2; ++slot) {
                const int c = g.face_cells[f][slot];
                if (c < 0) continue;
                const double sgn = (slot == 0 ? 1.0 : -1.0) * half;
                // u_tilde . n = (u_cref + G d) . n
                divu_t.emplace_back(c, 2 * cref + 0, sgn * n.x());
                divu_t.emplace_back(c, 2 * cref + 1, sgn * n.y());
                const Eigen::RowVector4d dn = n.x() * md.row(0) + n.y() * md.row(1);
                for (int j = 0; j < 2 * m; ++j) {
                    const double val = sgn * dn.dot(su.block<4, 1>(4 * ar, j));
                    if (val != 0.0) divu_t.emplace_back(c, 2 * cells[j / 2] + (j % 2), val);
                }
                for (int j = 0; j < m; ++j) {
                    const double val = sgn * dn.dot(sp.block<4, 1>(4 * ar, j));
                    if (val != 0.0) stab_t.emplace_back(c, cells[j], val);
                }
                for (int j = 0; j < 2 * nlf; ++j) {
                    const double val = sgn * dn.dot(sg.block<4, 1>(4 * ar, j));
                    if (val != 0.0) bdivu_t.emplace_back(c, 2 * vfaces[j / 2] + (j % 2), val);
                }
            }
        }
    }

    StressDiscretization d;
    d.stress = from_triplets(2 * nf, 2 * nc, stress_t);
    d.bound_stress = from_triplets(2 * nf, 2 * nf, bstress_t);
    d.grad_p = from_triplets(2 * nf, nc, gradp_t);
    d.div_u = from_triplets(nc, 2 * nc, divu_t);
    d.bound_div_u = from_triplets(nc, 2 * nf, bdivu_t);
    d.stabilization = from_triplets(nc, nc, stab_t);
    d.trace_cell = from_triplets(2 * nf, 2 * nc, tc_t);
    d.trace_bound = from_triplets(2 * nf, 2 * nf, tb_t);
    return d;
}

}  // namespace dfm
