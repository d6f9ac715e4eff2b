#include "dfm2d/models/poromech.hpp"

#include <algorithm>

#include "dfm2d/errors.hpp"

namespace dfm {

namespace {

using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Row entries of a sparse matrix, for per-row scatter.
std::vector<std::vector<std::pair<int, double>>> row_table(const SpMat& m)
{
    std::vector<std::vector<std::pair<int, double>>> rows(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
    return rows;
}

}  // namespace

PoromechPhysics make_poromech_physics(const MixedDimGraph& g, double matrix_k,
                                      const std::vector<FracturePhysics>& fracs,
                                      const OuterBC& flow_outer, const MechanicsParameters& mech,
                                      const MechOuterBC& mech_outer, double dt)
{
    if (!g.point_nodes.empty())
        throw ConfigError("poromechanics requires non-intersecting fractures");
    PoromechPhysics ph;
    ph.flow = make_flow_physics(g, matrix_k, fracs, flow_outer);
    ph.mech = mech;
    ph.dt = dt;

    const Grid& gh = g.nodes[g.matrix_node].grid;
    ph.mech_bc = VectorBC(gh, BC::Neumann);
    ph.mech_bc_values = Vec::Zero(2 * gh.num_faces());
    for (int f = 0; f < gh.num_faces(); ++f) {
        if (!gh.is_boundary_face(f)) continue;
        if (gh.face_tags[f] & TagFractureWall) {
            ph.mech_bc.kind[f] = {BC::Dirichlet, BC::Dirichlet};  // mortar displacement
        } else {
            std::array<BC, 2> kind{BC::Neumann, BC::Neumann};
            Vec2 value(0, 0);
            mech_outer(gh.face_centers.col(f), kind, value);
            ph.mech_bc.kind[f] = kind;
            // Neumann components carry total traction: scale densities here.
            for (int d = 0; d < 2; ++d)
                ph.mech_bc_values(2 * f + d) =
                    kind[d] == BC::Neumann ? value(d) * gh.face_measures(f) : value(d);
        }
    }
    ph.injection.resize(g.num_nodes());
    for (const auto& node : g.nodes) ph.injection[node.id] = Vec::Zero(node.grid.num_cells());
    return ph;
}

PoromechSystem::PoromechSystem(const MixedDimGraph& g, const PoromechPhysics& ph)
    : g_(g), ph_(ph), dofs_(g)
{
    if (!g.point_nodes.empty())
        throw ConfigError("poromechanics requires non-intersecting fractures");

    dofs_.add_variable(on_node(g.matrix_node), "displacement", 2);
    for (const auto& node : g.nodes) dofs_.add_variable(on_node(node.id), "pressure", 1);
    for (const auto& node : g.nodes)
        if (node.dim == 1) dofs_.add_variable(on_node(node.id), "contact_traction", 2);
    for (const auto& e : g.edges) {
        dofs_.add_variable(on_edge(e.id), "darcy_flux", 1);
        dofs_.add_variable(on_edge(e.id), "mortar_displacement", 2);
    }
    dofs_.finalize();

    const Grid& gh = g.nodes[g.matrix_node].grid;
    mpsa_ = mpsa(gh, ph.mech, ph.mech_bc);
    div_vec_ = divergence_vec(gh);
    div_h_ = divergence(gh);

    flow_discr_.resize(g.num_nodes());
    for (const auto& node : g.nodes)
        if (node.dim >= 1)
            flow_discr_[node.id] =
                mpfa(node.grid, ph.flow.params[node.id], ph.flow.bc[node.id]);

    edge_ops_.resize(g.num_edges());
    jump_op_.resize(g.num_edges());
    jump_local_.resize(g.num_edges());
    wall_scatter_.resize(g.num_edges());
    emech_.resize(g.num_edges());
    for (const auto& e : g.edges) {
        edge_ops_[e.id] =
            edge_flow_operators(g.nodes[e.high].grid, flow_discr_[e.high], e.mortar);
        wall_scatter_[e.id] = expand_vec(e.mortar.to_primary_avg);

        // signed jump (plus minus minus side) projected onto lower cells
        Vec signs(e.mortar.num_cells());
        for (int m = 0; m < e.mortar.num_cells(); ++m) signs(m) = e.mortar.side_sign(m);
        jump_op_[e.id] = expand_vec(SpMat(e.mortar.to_secondary_avg * diag(signs)));

        // local-frame jump rows: (2c) tangential, (2c+1) normal
        const int ncl = g.nodes[e.low].grid.num_cells();
        std::vector<Triplet> fr;
        for (int c = 0; c < ncl; ++c) {
            fr.emplace_back(2 * c, 2 * c, e.tangent.x());
            fr.emplace_back(2 * c, 2 * c + 1, e.tangent.y());
            fr.emplace_back(2 * c + 1, 2 * c, e.normal.x());
            fr.emplace_back(2 * c + 1, 2 * c + 1, e.normal.y());
        }
        jump_local_[e.id] =
            SpMat(from_triplets(2 * ncl, 2 * ncl, fr) * jump_op_[e.id]);
    }

    // Stress-balance row operators.
    for (const auto& e : g.edges) {
        EdgeMech& em = emech_[e.id];
        const int nm = e.mortar.num_cells();

        std::vector<int> wall(nm, -1);
        for (int k = 0; k < e.mortar.primary_avg.outerSize(); ++k)
            for (SpMat::InnerIterator it(e.mortar.primary_avg, k); it; ++it)
                wall[it.row()] = static_cast<int>(it.col());

        std::vector<Triplet> sel;
        for (int m = 0; m < nm; ++m) {
            const int f = wall[m];
            const int s_f = gh.face_sign(f, gh.boundary_cell(f));
            sel.emplace_back(2 * m, 2 * f, static_cast<double>(s_f));
            sel.emplace_back(2 * m + 1, 2 * f + 1, static_cast<double>(s_f));
        }
        em.wall_rows = from_triplets(2 * nm, 2 * gh.num_faces(), sel);
        em.t_u = SpMat(em.wall_rows * mpsa_.stress);
        em.t_p = SpMat(em.wall_rows * mpsa_.grad_p);
        em.t_um.resize(g.num_edges());
        const SpMat wb = SpMat(em.wall_rows * mpsa_.bound_stress);
        for (const auto& e2 : g.edges) em.t_um[e2.id] = SpMat(wb * wall_scatter_[e2.id]);

        // Contact-side balance: sgn * area * (sig_t t - sig_n n + alpha p_l n)
        const int ncl = g.nodes[e.low].grid.num_cells();
        std::vector<Triplet> bs, bp;
        for (int m = 0; m < nm; ++m) {
            const double sgn = e.mortar.side_sign(m);
            const double area = gh.face_measures(wall[m]);
            for (int k = 0; k < e.mortar.secondary_avg.outerSize(); ++k)
                for (SpMat::InnerIterator it(e.mortar.secondary_avg, k); it; ++it) {
                    if (it.row() != m) continue;
                    const int lc = static_cast<int>(it.col());
                    for (int comp = 0; comp < 2; ++comp) {
                        bs.emplace_back(2 * m + comp, 2 * lc,
                                        sgn * area * e.tangent(comp) * it.value());
                        bs.emplace_back(2 * m + comp, 2 * lc + 1,
                                        -sgn * area * e.normal(comp) * it.value());
                        bp.emplace_back(2 * m + comp, lc,
                                        sgn * area * ph.alpha_frac * e.normal(comp)
                                            * it.value());
                    }
                }
        }
        em.bal_sig = from_triplets(2 * nm, 2 * ncl, bs);
        em.bal_pl = from_triplets(2 * nm, ncl, bp);
    }

    mech_bc_values_ = ph.mech_bc_values;
    flow_bc_values_.resize(g.num_nodes());
    injection_.resize(g.num_nodes());
    for (const auto& node : g.nodes) {
        flow_bc_values_[node.id] = ph.flow.bc_values[node.id];
        injection_[node.id] = ph.injection.empty() ? Vec::Zero(node.grid.num_cells())
                                                   : ph.injection[node.id];
    }
    steady_ = ph.steady;

    modes_.resize(g.num_nodes());
    slip_sign_.resize(g.num_nodes());
    aperture_active_.resize(g.num_nodes());
    aperture_prev_.resize(g.num_nodes());
    jump_t_prev_.resize(g.num_nodes());
    for (const auto& node : g.nodes) {
        if (node.dim != 1) continue;
        const int nc = node.grid.num_cells();
        modes_[node.id].assign(nc, ContactMode::Stick);
        slip_sign_[node.id].assign(nc, 1);
        aperture_active_[node.id].assign(nc, 0);
        aperture_prev_[node.id] = Vec::Constant(nc, ph.mech.residual_aperture);
        jump_t_prev_[node.id] = Vec::Zero(nc);
    }
    prev_ = Vec::Zero(dofs_.size());
    vol_prev_ = Vec::Zero(gh.num_cells());
}

std::vector<std::pair<int, int>> PoromechSystem::blocks() const
{
    std::vector<std::pair<int, int>> out;
    for (const auto& b : dofs_.blocks()) out.emplace_back(b.offset, b.size);
    return out;
}

Vec PoromechSystem::node_values(const Vec& x, const std::string& var, int node) const
{
    return x.segment(dofs_.offset(on_node(node), var), dofs_.block_size(on_node(node), var));
}

Vec PoromechSystem::edge_values(const Vec& x, const std::string& var, int edge) const
{
    return x.segment(dofs_.offset(on_edge(edge), var), dofs_.block_size(on_edge(edge), var));
}

Vec PoromechSystem::mech_boundary_data(const Vec& x) const
{
    Vec g_u = mech_bc_values_;
    for (const auto& e : g_.edges)
        g_u += wall_scatter_[e.id] * edge_values(x, "mortar_displacement", e.id);
    return g_u;
}

Eigen::Matrix2Xd PoromechSystem::jumps(const Vec& x, int frac_node) const
{
    int eid = -1;
    for (const auto& e : g_.edges)
        if (e.low == frac_node) eid = e.id;
    if (eid < 0) throw Error("jumps: fracture node has no interface");
    const Vec jloc = jump_local_[eid] * edge_values(x, "mortar_displacement", eid);
    const int nc = g_.nodes[frac_node].grid.num_cells();
    Eigen::Matrix2Xd out(2, nc);
    for (int c = 0; c < nc; ++c) {
        out(0, c) = jloc(2 * c);      // tangential
        out(1, c) = jloc(2 * c + 1);  // normal
    }
    return out;
}

std::vector<ContactMode> PoromechSystem::modes(int frac_node) const
{
    return modes_[frac_node];
}

std::size_t PoromechSystem::classification_hash() const
{
    std::size_t h = 1469598103934665603ULL;
    for (int c : last_classification_) {
        h ^= static_cast<std::size_t>(c) + 0x9e3779b9;
        h *= 1099511628211ULL;
    }
    return h;
}

Vec PoromechSystem::volumetric(const Vec& x) const
{
    const Vec u = node_values(x, "displacement", g_.matrix_node);
    const Vec p = node_values(x, "pressure", g_.matrix_node);
    return mpsa_.div_u * u + mpsa_.bound_div_u * mech_boundary_data(x)
         + mpsa_.stabilization * p;
}

void PoromechSystem::set_previous(const Vec& x)
{
    prev_ = x;
    vol_prev_ = volumetric(x);
    for (const auto& node : g_.nodes) {
        if (node.dim != 1) continue;
        const Eigen::Matrix2Xd j = jumps(x, node.id);
        for (int c = 0; c < node.grid.num_cells(); ++c) {
            aperture_prev_[node.id](c) =
                ph_.mech.residual_aperture + std::max(0.0, j(1, c));
            jump_t_prev_[node.id](c) = j(0, c);
        }
    }
}

void PoromechSystem::begin_iteration(const Vec& x)
{
    std::vector<int> cls;
    for (const auto& node : g_.nodes) {
        if (node.dim != 1) continue;
        const Eigen::Matrix2Xd j = jumps(x, node.id);
        const Vec sig = node_values(x, "contact_traction", node.id);
        for (int c = 0; c < node.grid.num_cells(); ++c) {
            ContactPointState s{sig(2 * c + 1), sig(2 * c), j(1, c),
                                j(0, c) - jump_t_prev_[node.id](c)};
            const ContactBranch b =
                classify_contact(s, ph_.mech.c_num_n, ph_.mech.c_num_t, ph_.mech.friction);
            modes_[node.id][c] = b.mode;
            slip_sign_[node.id][c] = b.slip_sign;
            aperture_active_[node.id][c] = j(1, c) > 0 ? 1 : 0;
            cls.push_back(static_cast<int>(b.mode) * 4 + (b.slip_sign > 0 ? 2 : 0)
                          + aperture_active_[node.id][c]);
        }
    }
    stable_ = (cls == last_classification_);
    last_classification_ = std::move(cls);
}

void PoromechSystem::residual_and_jacobian(const Vec& x, Vec* r, std::vector<Triplet>* ts)
{
    const Grid& gh = g_.nodes[g_.matrix_node].grid;
    const int u_off = dofs_.offset(on_node(g_.matrix_node), "displacement");
    const int ph_off = dofs_.offset(on_node(g_.matrix_node), "pressure");
    const double dt = ph_.dt;
    const double alpha = ph_.mech.biot_alpha;

    const Vec u = node_values(x, "displacement", g_.matrix_node);
    const Vec p_h = node_values(x, "pressure", g_.matrix_node);
    const Vec g_u = mech_boundary_data(x);
    const Vec traction = mpsa_.stress * u + mpsa_.bound_stress * g_u + mpsa_.grad_p * p_h;

    // --- matrix momentum ---
    if (r) {
        Vec body(2 * gh.num_cells());
        for (int c = 0; c < gh.num_cells(); ++c)
            body.segment<2>(2 * c) = ph_.mech.body_force * gh.cell_measures(c);
        r->segment(u_off, 2 * gh.num_cells()) = div_vec_ * traction - body;
    }
    if (ts) {
        append_block(*ts, SpMat(div_vec_ * mpsa_.stress), u_off, u_off);
        append_block(*ts, SpMat(div_vec_ * mpsa_.grad_p), u_off, ph_off);
        for (const auto& e : g_.edges) {
            const int um_off = dofs_.offset(on_edge(e.id), "mortar_displacement");
            append_block(*ts, SpMat(div_vec_ * mpsa_.bound_stress * wall_scatter_[e.id]),
                         u_off, um_off);
        }
    }

    // --- matrix mass balance ---
    {
        Vec g_p = flow_bc_values_[g_.matrix_node];
        for (const auto& e : g_.edges)
            if (e.high == g_.matrix_node)
                g_p += e.mortar.to_primary_int * edge_values(x, "darcy_flux", e.id);
        const auto& d = flow_discr_[g_.matrix_node];
        if (r) {
            const Vec q = d.flux * p_h + d.bound_flux * g_p;
            Vec rr = div_h_ * q
                   - (ph_.flow.params[g_.matrix_node].source + injection_[g_.matrix_node])
                         .cwiseProduct(gh.cell_measures);
            if (!steady_) {
                const Vec p_prev = prev_.segment(ph_off, gh.num_cells());
                rr += ph_.mech.storage * gh.cell_measures.cwiseProduct(p_h - p_prev) / dt;
                rr += alpha * (volumetric(x) - vol_prev_) / dt;
            }
            r->segment(ph_off, gh.num_cells()) = rr;
        }
        if (ts) {
            append_block(*ts, SpMat(div_h_ * d.flux), ph_off, ph_off);
            for (const auto& e : g_.edges) {
                if (e.high != g_.matrix_node) continue;
                const int l_off = dofs_.offset(on_edge(e.id), "darcy_flux");
                append_block(*ts, SpMat(div_h_ * d.bound_flux * e.mortar.to_primary_int),
                             ph_off, l_off);
            }
            if (!steady_) {
                for (int c = 0; c < gh.num_cells(); ++c)
                    ts->emplace_back(ph_off + c, ph_off + c,
                                     ph_.mech.storage * gh.cell_measures(c) / dt);
                append_block(*ts, mpsa_.stabilization, ph_off, ph_off, alpha / dt);
                append_block(*ts, mpsa_.div_u, ph_off, u_off, alpha / dt);
                for (const auto& e : g_.edges) {
                    const int um_off = dofs_.offset(on_edge(e.id), "mortar_displacement");
                    append_block(*ts, SpMat(mpsa_.bound_div_u * wall_scatter_[e.id]), ph_off,
                                 um_off, alpha / dt);
                }
            }
        }
    }

    // --- fracture subdomains ---
    for (const auto& node : g_.nodes) {
        if (node.dim != 1) continue;
        const Grid& gl = node.grid;
        const int pl_off = dofs_.offset(on_node(node.id), "pressure");
        const int sig_off = dofs_.offset(on_node(node.id), "contact_traction");
        const Vec p_l = node_values(x, "pressure", node.id);
        const Vec sig = node_values(x, "contact_traction", node.id);
        int eid = -1;
        for (const auto& e : g_.edges)
            if (e.low == node.id) eid = e.id;
        const auto& e = g_.edges[eid];
        const int um_off = dofs_.offset(on_edge(eid), "mortar_displacement");
        const int lam_off = dofs_.offset(on_edge(eid), "darcy_flux");
        const Eigen::Matrix2Xd j = jumps(x, node.id);
        const SpMat div_l = divergence(gl);
        const auto& dl = flow_discr_[node.id];
        const auto jloc_rows = row_table(jump_local_[eid]);

        if (r) {
            const Vec q_l = dl.flux * p_l + dl.bound_flux * flow_bc_values_[node.id];
            Vec rr = div_l * q_l
                   - (ph_.flow.params[node.id].source + injection_[node.id])
                         .cwiseProduct(gl.cell_measures);
            rr -= e.mortar.to_secondary_int * edge_values(x, "darcy_flux", eid);
            if (!steady_) {
                const Vec p_prev = prev_.segment(pl_off, gl.num_cells());
                rr += ph_.theta_frac * gl.cell_measures.cwiseProduct(p_l - p_prev) / dt;
                for (int c = 0; c < gl.num_cells(); ++c) {
                    const double ap = ph_.mech.residual_aperture + std::max(0.0, j(1, c));
                    rr(c) += gl.cell_measures(c) * (ap - aperture_prev_[node.id](c)) / dt;
                }
            }
            r->segment(pl_off, gl.num_cells()) = rr;
        }
        if (ts) {
            append_block(*ts, SpMat(div_l * dl.flux), pl_off, pl_off);
            append_block(*ts, e.mortar.to_secondary_int, pl_off, lam_off, -1.0);
            if (!steady_) {
                for (int c = 0; c < gl.num_cells(); ++c) {
                    ts->emplace_back(pl_off + c, pl_off + c,
                                     ph_.theta_frac * gl.cell_measures(c) / dt);
                    if (aperture_active_[node.id][c]) {
                        const double w = gl.cell_measures(c) / dt;
                        for (const auto& [col, val] : jloc_rows[2 * c + 1])
                            ts->emplace_back(pl_off + c, um_off + col, w * val);
                    }
                }
            }
        }

        // contact rows per fracture cell (tangential, normal)
        for (int c = 0; c < gl.num_cells(); ++c) {
            const ContactBranch b{modes_[node.id][c], slip_sign_[node.id][c]};
            const ContactRows rows = contact_rows(b, jump_t_prev_[node.id](c),
                                                  ph_.mech.c_num_n, ph_.mech.c_num_t,
                                                  ph_.mech.friction);
            const Eigen::Vector2d sj{sig(2 * c), sig(2 * c + 1)};  // (t, n)
            const Eigen::Vector2d jj{j(0, c), j(1, c)};
            if (r)
                r->segment(sig_off + 2 * c, 2) =
                    rows.coef_sigma * sj + rows.coef_jump * jj + rows.rhs;
            if (ts) {
                for (int rr = 0; rr < 2; ++rr) {
                    for (int cc = 0; cc < 2; ++cc)
                        if (rows.coef_sigma(rr, cc) != 0)
                            ts->emplace_back(sig_off + 2 * c + rr, sig_off + 2 * c + cc,
                                             rows.coef_sigma(rr, cc));
                    for (int cc = 0; cc < 2; ++cc) {
                        if (rows.coef_jump(rr, cc) == 0) continue;
                        for (const auto& [col, val] : jloc_rows[2 * c + cc])
                            ts->emplace_back(sig_off + 2 * c + rr, um_off + col,
                                             rows.coef_jump(rr, cc) * val);
                    }
                }
            }
        }
    }

    // --- interface rows ---
    for (const auto& e : g_.edges) {
        const EdgeMech& em = emech_[e.id];
        const int um_off = dofs_.offset(on_edge(e.id), "mortar_displacement");
        const int lam_off = dofs_.offset(on_edge(e.id), "darcy_flux");
        const int sig_off = dofs_.offset(on_node(e.low), "contact_traction");
        const int pl_off = dofs_.offset(on_node(e.low), "pressure");
        const int nm = e.mortar.num_cells();
        const Vec sig = node_values(x, "contact_traction", e.low);
        const Vec p_l = node_values(x, "pressure", e.low);

        // stress balance rows
        if (r)
            r->segment(um_off, 2 * nm) =
                em.wall_rows * traction - em.bal_sig * sig - em.bal_pl * p_l;
        if (ts) {
            append_block(*ts, em.t_u, um_off, u_off);
            append_block(*ts, em.t_p, um_off, ph_off);
            for (const auto& e2 : g_.edges)
                append_block(*ts, em.t_um[e2.id], um_off,
                             dofs_.offset(on_edge(e2.id), "mortar_displacement"));
            append_block(*ts, em.bal_sig, um_off, sig_off, -1.0);
            append_block(*ts, em.bal_pl, um_off, pl_off, -1.0);
        }

        // Robin flux rows
        const RobinBlocks rb = assemble_robin_coupling(
            edge_ops_[e.id], ph_.flow.resistance[e.id], ph_.flow.weight[e.id],
            flow_bc_values_[e.high]);
        if (r) {
            const Vec lam = edge_values(x, "darcy_flux", e.id);
            const Vec ph_high = node_values(x, "pressure", e.high);
            r->segment(lam_off, nm) = rb.d_mortar * lam + rb.to_high * ph_high
                                    + rb.to_low * p_l - rb.rhs;
        }
        if (ts) {
            const int hp_off = dofs_.offset(on_node(e.high), "pressure");
            append_block(*ts, rb.d_mortar, lam_off, lam_off);
            append_block(*ts, rb.to_high, lam_off, hp_off);
            append_block(*ts, rb.to_low, lam_off, pl_off);
        }
    }
}

Vec PoromechSystem::residual(const Vec& x)
{
    Vec r = Vec::Zero(size());
    residual_and_jacobian(x, &r, nullptr);
    return r;
}

SpMat PoromechSystem::jacobian(const Vec& x)
{
    std::vector<Triplet> ts;
    residual_and_jacobian(x, nullptr, &ts);
    return from_triplets(size(), size(), ts);
}

NewtonReport poromech_step(PoromechSystem& sys, Vec& x, const NewtonConfig& cfg)
{
    return newton_solve(sys, x, cfg);
}

PoromechResult run_biot_contact(const MixedDimGraph& g, PoromechPhysics& ph,
                                int inject_fracture, double rate, double t_inject,
                                double t_end, const NewtonConfig& newton)
{
    PoromechSystem sys(g, ph);
    Vec x = Vec::Zero(sys.size());

    // Equilibrium initialization with the well shut.
    sys.set_steady(true);
    NewtonReport rep0 = poromech_step(sys, x, newton);
    if (!rep0.converged)
        throw SolverError("poromech equilibrium solve failed: " + rep0.failure);
    sys.set_steady(false);

    PoromechResult out;
    std::vector<int> frac_nodes;
    for (const auto& node : g.nodes)
        if (node.dim == 1) frac_nodes.push_back(node.id);
    out.fractures.resize(frac_nodes.size());

    const int inj_node = g.fracture_nodes.at(inject_fracture);
    const Grid& gi = g.nodes[inj_node].grid;

    auto record = [&](double t) {
        out.times.push_back(t);
        for (std::size_t k = 0; k < frac_nodes.size(); ++k) {
            const int fn = frac_nodes[k];
            const Eigen::Matrix2Xd j = sys.jumps(x, fn);
            const Vec& meas = g.nodes[fn].grid.cell_measures;
            const double wsum = meas.sum();
            double nt = 0, nn = 0;
            for (int c = 0; c < j.cols(); ++c) {
                nt += meas(c) * j(0, c) * j(0, c);
                nn += meas(c) * j(1, c) * j(1, c);
            }
            auto& h = out.fractures[k];
            h.time.push_back(t);
            h.jump_t_norm.push_back(std::sqrt(nt / wsum));
            h.jump_n_norm.push_back(std::sqrt(nn / wsum));
            const auto modes = sys.modes(fn);
            h.num_slip.push_back(static_cast<int>(
                std::count(modes.begin(), modes.end(), ContactMode::Slip)));
            h.num_open.push_back(static_cast<int>(
                std::count(modes.begin(), modes.end(), ContactMode::Open)));
            h.num_stick.push_back(static_cast<int>(
                std::count(modes.begin(), modes.end(), ContactMode::Stick)));
        }
    };
    record(0.0);

    const int nsteps = static_cast<int>(std::round(t_end / ph.dt));
    for (int step = 1; step <= nsteps; ++step) {
        const double t = step * ph.dt;
        sys.set_previous(x);
        Vec inj = Vec::Zero(gi.num_cells());
        if (t <= t_inject + 1e-12) {
            const int mid = gi.num_cells() / 2;
            inj(mid) = rate / gi.cell_measures(mid);
        }
        sys.set_injection(inj_node, inj);
        NewtonReport rep = poromech_step(sys, x, newton);
        if (!rep.converged)
            throw SolverError("poromech step " + std::to_string(step)
                              + " failed: " + rep.failure);
        record(t);
    }
    out.final_state = x;
    out.final_state_per_node_pressure.resize(g.num_nodes());
    for (const auto& node : g.nodes)
        out.final_state_per_node_pressure[node.id] = sys.node_values(x, "pressure", node.id);
    return out;
}

}  // namespace dfm
