#include "dfm2d/models/transport.hpp"

#include "dfm2d/errors.hpp"

namespace dfm {

TransportPhysics make_transport_physics(const MixedDimGraph& g, const FlowPhysics& flow,
                                        double matrix_diff, double frac_diff,
                                        double interface_diff,
                                        const std::function<double(Vec2)>& inlet_conc,
                                        double dt)
{
    TransportPhysics ph;
    ph.flow = flow;
    ph.dt = dt;
    ph.cbc.resize(g.num_nodes());
    ph.cbc_values.resize(g.num_nodes());
    ph.source_conc.resize(g.num_nodes());
    for (const auto& node : g.nodes) {
        const Grid& grid = node.grid;
        // Effective diffusivity: aperture-scaled in fractures, like K.
        double d = matrix_diff;
        if (node.dim == 1) {
            double ap = 1.0;
            // recover the aperture from the interface weight of this node's
            // 2d-1d edge; stored per edge as mortar weight = |m|, so use the
            // params map when provided, else unit
            auto it = node.params.find("aperture");
            if (it != node.params.end()) ap = it->second;
            d = frac_diff * ap;
        }
        if (node.dim >= 1 && d > 0)
            ph.flow.params[node.id].diffusivity = TensorField::isotropic(grid.num_cells(), d);

        ScalarBC cbc(grid, BC::Neumann);
        Vec cv = Vec::Zero(grid.num_faces());
        for (int f = 0; f < grid.num_faces(); ++f) {
            if (!grid.is_boundary_face(f)) continue;
            const bool on_outer = (grid.face_tags[f] & TagDomainBoundary)
                                && !(grid.face_tags[f] & TagFractureWall);
            if (on_outer && flow.bc[node.id].is_dir(f)) {
                cbc.kind[f] = BC::Dirichlet;
                cv(f) = inlet_conc(grid.face_centers.col(f));
            }
        }
        ph.cbc[node.id] = std::move(cbc);
        ph.cbc_values[node.id] = std::move(cv);
        ph.source_conc[node.id] = Vec::Zero(grid.num_cells());
    }
    ph.delta.resize(g.num_edges());
    for (const auto& e : g.edges)
        ph.delta[e.id] = Vec::Constant(e.mortar.num_cells(), interface_diff);
    return ph;
}

TransportSystem::TransportSystem(const MixedDimGraph& g, const TransportPhysics& ph)
    : g_(g), ph_(ph), dofs_(g)
{
    for (const auto& node : g.nodes) {
        dofs_.add_variable(on_node(node.id), "pressure", 1);
        dofs_.add_variable(on_node(node.id), "concentration", 1);
    }
    for (const auto& e : g.edges) {
        dofs_.add_variable(on_edge(e.id), "darcy_flux", 1);
        dofs_.add_variable(on_edge(e.id), "diff_flux", 1);
        dofs_.add_variable(on_edge(e.id), "adv_flux", 1);
    }
    dofs_.finalize();

    nodes_.resize(g.num_nodes());
    for (const auto& node : g.nodes) {
        NodeCache& nc = nodes_[node.id];
        if (node.dim == 0) continue;
        const Grid& grid = node.grid;
        nc.half_trans = half_transmissibilities(grid, ph.flow.params[node.id].permeability);
        nc.diff = tpfa(grid,
                       FlowParameters{ph.flow.params[node.id].diffusivity,
                                      Vec::Ones(grid.num_cells()), Vec::Zero(grid.num_cells()),
                                      Vec::Ones(grid.num_cells()),
                                      ph.flow.params[node.id].diffusivity},
                       ph.cbc[node.id]);
        nc.div = divergence(grid);
        nc.is_interface.assign(grid.num_faces(), 0);
        for (int f = 0; f < grid.num_faces(); ++f) {
            if (!grid.is_boundary_face(f)) continue;
            const bool wall = grid.face_tags[f] & TagFractureWall;
            const bool iface_1d = grid.dim == 1 && grid.face_fracture[f] >= 0;
            nc.is_interface[f] = (wall || iface_1d) ? 1 : 0;
        }
        nc.upstream.assign(grid.num_faces(), 0);
        nc.face_flux = Vec::Zero(grid.num_faces());
    }

    edges_.resize(g.num_edges());
    for (const auto& e : g.edges) {
        EdgeCache& ec = edges_[e.id];
        const int nm = e.mortar.num_cells();
        ec.wall_face.assign(nm, -1);
        ec.adj_cell.assign(nm, -1);
        for (int k = 0; k < e.mortar.primary_avg.outerSize(); ++k)
            for (SpMat::InnerIterator it(e.mortar.primary_avg, k); it; ++it) {
                ec.wall_face[it.row()] = static_cast<int>(it.col());
                ec.adj_cell[it.row()] =
                    g.nodes[e.high].grid.boundary_cell(static_cast<int>(it.col()));
            }
        ec.lower_avg = e.mortar.secondary_avg;
        ec.into_lower = e.mortar.to_secondary_int;
        ec.upstream_high.assign(nm, 1);
        ec.lower_rows.resize(nm);
        for (int k = 0; k < ec.lower_avg.outerSize(); ++k)
            for (SpMat::InnerIterator it(ec.lower_avg, k); it; ++it)
                ec.lower_rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
    }
    prev_ = initial_state(0.0);
}

std::vector<std::pair<int, int>> TransportSystem::blocks() const
{
    std::vector<std::pair<int, int>> out;
    for (const auto& b : dofs_.blocks()) out.emplace_back(b.offset, b.size);
    return out;
}

Vec TransportSystem::node_values(const Vec& x, const std::string& var, int node) const
{
    return x.segment(dofs_.offset(on_node(node), var), dofs_.block_size(on_node(node), var));
}

Vec TransportSystem::edge_values(const Vec& x, const std::string& var, int edge) const
{
    return x.segment(dofs_.offset(on_edge(edge), var), dofs_.block_size(on_edge(edge), var));
}

double TransportSystem::mobility_flux(int node, int face, const Vec& p, const Vec& c,
                                      const Vec& lam_data, double* dq_dp0, double* dq_dp1,
                                      double* dq_dc0, double* dq_dc1, double* dq_dlam) const
{
    const Grid& grid = g_.nodes[node].grid;
    const NodeCache& nc = nodes_[node];
    const int c0 = grid.face_cells[face][0], c1 = grid.face_cells[face][1];
    auto setz = [&]() {
        if (dq_dp0) *dq_dp0 = 0;
        if (dq_dp1) *dq_dp1 = 0;
        if (dq_dc0) *dq_dc0 = 0;
        if (dq_dc1) *dq_dc1 = 0;
        if (dq_dlam) *dq_dlam = 0;
    };
    setz();
    if (c0 >= 0 && c1 >= 0) {
        const double mu0 = ph_.mu(c(c0)), mu1 = ph_.mu(c(c1));
        const double a0 = nc.half_trans(0, face) / mu0, a1 = nc.half_trans(1, face) / mu1;
        const double t = a0 * a1 / (a0 + a1);
        const double dp = p(c0) - p(c1);
        if (dq_dp0) *dq_dp0 = t;
        if (dq_dp1) *dq_dp1 = -t;
        const double w0 = a1 / (a0 + a1), w1 = a0 / (a0 + a1);
        if (dq_dc0) *dq_dc0 = dp * w0 * w0 * (-a0 * ph_.dmu(c(c0)) / mu0);
        if (dq_dc1) *dq_dc1 = dp * w1 * w1 * (-a1 * ph_.dmu(c(c1)) / mu1);
        return t * dp;
    }
    const int cc = grid.boundary_cell(face);
    const int s = grid.face_sign(face, cc);
    if (nc.is_interface[face]) {
        if (dq_dlam) *dq_dlam = s;
        return s * lam_data(face);
    }
    if (ph_.flow.bc[node].is_dir(face)) {
        const double mu = ph_.mu(c(cc));
        const double a = nc.half_trans(c0 >= 0 ? 0 : 1, face) / mu;
        const double dp = p(cc) - ph_.flow.bc_values[node](face);
        if (dq_dp0) *dq_dp0 = s * a;
        if (dq_dc0) *dq_dc0 = s * dp * (-a * ph_.dmu(c(cc)) / mu);
        return s * a * dp;
    }
    return s * ph_.flow.bc_values[node](face);  // outer Neumann data
}

void TransportSystem::compute_fluxes(const Vec& x)
{
    for (const auto& node : g_.nodes) {
        if (node.dim == 0) continue;
        NodeCache& nc = nodes_[node.id];
        const Grid& grid = node.grid;
        const Vec p = node_values(x, "pressure", node.id);
        const Vec c = node_values(x, "concentration", node.id);
        Vec lam_data = Vec::Zero(grid.num_faces());
        for (int eid : g_.sorted_neighbors(node.id).lower)
            lam_data += g_.edges[eid].mortar.to_primary_int
                      * edge_values(x, "darcy_flux", eid);
        for (int f = 0; f < grid.num_faces(); ++f)
            nc.face_flux(f) = mobility_flux(node.id, f, p, c, lam_data);
    }
}

void TransportSystem::begin_iteration(const Vec& x)
{
    compute_fluxes(x);
    std::vector<int> cls;
    for (const auto& node : g_.nodes) {
        if (node.dim == 0) continue;
        NodeCache& nc = nodes_[node.id];
        const Grid& grid = node.grid;
        for (int f = 0; f < grid.num_faces(); ++f) {
            const int c0 = grid.face_cells[f][0];
            nc.upstream[f] = nc.face_flux(f) >= 0 ? 0 : 1;
            (void)c0;
            cls.push_back(nc.upstream[f]);
        }
    }
    for (const auto& e : g_.edges) {
        EdgeCache& ec = edges_[e.id];
        const Vec lam = edge_values(x, "darcy_flux", e.id);
        for (int m = 0; m < e.mortar.num_cells(); ++m) {
            ec.upstream_high[m] = lam(m) >= 0 ? 1 : 0;
            cls.push_back(ec.upstream_high[m]);
        }
    }
    stable_ = (cls == last_classification_);
    last_classification_ = std::move(cls);
}

Vec TransportSystem::residual(const Vec& x)
{
    Vec r = Vec::Zero(size());
    const double dt = ph_.dt;

    for (const auto& node : g_.nodes) {
        const Grid& grid = node.grid;
        const int poff = dofs_.offset(on_node(node.id), "pressure");
        const int coff = dofs_.offset(on_node(node.id), "concentration");
        const Vec p = node_values(x, "pressure", node.id);
        const Vec c = node_values(x, "concentration", node.id);
        const Vec c_prev = prev_.segment(coff, grid.num_cells());
        const auto& par = ph_.flow.params[node.id];

        if (node.dim == 0) {
            r(poff) = -par.source(0);
            r(coff) = -par.source(0) * ph_.source_conc[node.id](0);
            for (int eid : g_.sorted_neighbors(node.id).higher) {
                r(poff) -= (edges_[eid].into_lower * edge_values(x, "darcy_flux", eid))(0);
                r(coff) -= (edges_[eid].into_lower
                            * Vec(edge_values(x, "diff_flux", eid)
                                  + edge_values(x, "adv_flux", eid)))(0);
            }
            continue;
        }

        const NodeCache& nc = nodes_[node.id];
        Vec lam_data = Vec::Zero(grid.num_faces());
        Vec cm_data = Vec::Zero(grid.num_faces());
        for (int eid : g_.sorted_neighbors(node.id).lower) {
            lam_data += g_.edges[eid].mortar.to_primary_int
                      * edge_values(x, "darcy_flux", eid);
            cm_data += g_.edges[eid].mortar.to_primary_int
                     * Vec(edge_values(x, "diff_flux", eid)
                           + edge_values(x, "adv_flux", eid));
        }

        // Face fluxes at the current state (branches stay frozen).
        Vec q(grid.num_faces()), w(grid.num_faces());
        for (int f = 0; f < grid.num_faces(); ++f)
            q(f) = mobility_flux(node.id, f, p, c, lam_data);
        // diffusive part plus boundary data
        Vec g_cdata = ph_.cbc_values[node.id] + cm_data;
        w = nc.diff.flux * c + nc.diff.bound_flux * g_cdata;
        // advective part
        for (int f = 0; f < grid.num_faces(); ++f) {
            if (nc.is_interface[f]) continue;  // wall advection carried by eta
            const int c0 = grid.face_cells[f][0], c1 = grid.face_cells[f][1];
            if (c0 >= 0 && c1 >= 0) {
                w(f) += q(f) * c(nc.upstream[f] == 0 ? c0 : c1);
            } else {
                const int cc = grid.boundary_cell(f);
                const int s = grid.face_sign(f, cc);
                const double q_out = s * q(f);
                if (q_out >= 0)
                    w(f) += q(f) * c(cc);
                else
                    w(f) += q(f)
                          * (ph_.cbc[node.id].is_dir(f) ? ph_.cbc_values[node.id](f) : 0.0);
            }
        }

        r.segment(poff, grid.num_cells()) =
            nc.div * q - par.source.cwiseProduct(grid.cell_measures);
        Vec storage = par.porosity.cwiseProduct(grid.cell_measures).cwiseProduct(c - c_prev) / dt;
        Vec src_species(grid.num_cells());
        for (int cc = 0; cc < grid.num_cells(); ++cc) {
            const double f_src = par.source(cc) * grid.cell_measures(cc);
            src_species(cc) = f_src >= 0 ? f_src * ph_.source_conc[node.id](cc)
                                         : f_src * c(cc);
        }
        r.segment(coff, grid.num_cells()) = storage + nc.div * w - src_species;

        for (int eid : g_.sorted_neighbors(node.id).higher) {
            r.segment(poff, grid.num_cells()) -=
                edges_[eid].into_lower * edge_values(x, "darcy_flux", eid);
            r.segment(coff, grid.num_cells()) -=
                edges_[eid].into_lower
                * Vec(edge_values(x, "diff_flux", eid) + edge_values(x, "adv_flux", eid));
        }
    }

    // Interface laws.
    for (const auto& e : g_.edges) {
        const EdgeCache& ec = edges_[e.id];
        const int nm = e.mortar.num_cells();
        const int loff_lam = dofs_.offset(on_edge(e.id), "darcy_flux");
        const int loff_beta = dofs_.offset(on_edge(e.id), "diff_flux");
        const int loff_eta = dofs_.offset(on_edge(e.id), "adv_flux");
        const Vec lam = edge_values(x, "darcy_flux", e.id);
        const Vec beta = edge_values(x, "diff_flux", e.id);
        const Vec eta = edge_values(x, "adv_flux", e.id);
        const Vec p_h = node_values(x, "pressure", e.high);
        const Vec c_h = node_values(x, "concentration", e.high);
        const Vec p_l = node_values(x, "pressure", e.low);
        const Vec c_l = node_values(x, "concentration", e.low);
        const Vec pi_l = ec.lower_avg * p_l;
        const Vec ci_l = ec.lower_avg * c_l;
        const NodeCache& nch = nodes_[e.high];
        const Grid& gh = g_.nodes[e.high].grid;

        for (int m = 0; m < nm; ++m) {
            const int f = ec.wall_face[m];
            const int cf = ec.adj_cell[m];
            const int slot = gh.face_cells[f][0] >= 0 ? 0 : 1;
            const double th = nch.half_trans(slot, f);
            const double w_m = ph_.flow.weight[e.id](m);
            const double r0 = ph_.flow.resistance[e.id](m) / ph_.flow.viscosity;

            // Darcy law with concentration-dependent interface viscosity.
            const double cbar = 0.5 * (c_h(cf) + ci_l(m));
            const double mu_j = ph_.mu(cbar);
            const double trace_p = p_h(cf) - lam(m) * ph_.mu(c_h(cf)) / th;
            r(loff_lam + m) = mu_j * r0 * lam(m) + w_m * (pi_l(m) - trace_p);

            // Diffusive mortar law.
            if (ph_.delta[e.id](m) > 0) {
                const double thd = half_transmissibilities(
                                       gh, ph_.flow.params[e.high].diffusivity)(slot, f);
                const double trace_c = c_h(cf) - beta(m) / thd;
                r(loff_beta + m) = beta(m) / ph_.delta[e.id](m) + w_m * (ci_l(m) - trace_c);
            } else {
                r(loff_beta + m) = beta(m);
            }

            // Advective mortar law, upstream by the frozen branch.
            const double up = ec.upstream_high[m] ? c_h(cf) : ci_l(m);
            r(loff_eta + m) = eta(m) - lam(m) * up;
        }
    }
    return r;
}

SpMat TransportSystem::jacobian(const Vec& x)
{
    std::vector<Triplet> ts;
    const double dt = ph_.dt;

    for (const auto& node : g_.nodes) {
        const Grid& grid = node.grid;
        const int poff = dofs_.offset(on_node(node.id), "pressure");
        const int coff = dofs_.offset(on_node(node.id), "concentration");

        if (node.dim == 0) {
            for (int eid : g_.sorted_neighbors(node.id).higher) {
                const int lo_lam = dofs_.offset(on_edge(eid), "darcy_flux");
                const int lo_b = dofs_.offset(on_edge(eid), "diff_flux");
                const int lo_e = dofs_.offset(on_edge(eid), "adv_flux");
                append_block(ts, edges_[eid].into_lower, poff, lo_lam, -1.0);
                append_block(ts, edges_[eid].into_lower, coff, lo_b, -1.0);
                append_block(ts, edges_[eid].into_lower, coff, lo_e, -1.0);
            }
            continue;
        }

        const NodeCache& nc = nodes_[node.id];
        const Vec p = node_values(x, "pressure", node.id);
        const Vec c = node_values(x, "concentration", node.id);
        Vec lam_data = Vec::Zero(grid.num_faces());
        for (int eid : g_.sorted_neighbors(node.id).lower)
            lam_data += g_.edges[eid].mortar.to_primary_int
                      * edge_values(x, "darcy_flux", eid);

        // Map from wall faces to (edge mortar) columns; primary is 1-1.
        std::vector<int> wall_col(grid.num_faces(), -1);
        for (int eid : g_.sorted_neighbors(node.id).lower) {
            const EdgeCache& ec = edges_[eid];
            const int lo_lam = dofs_.offset(on_edge(eid), "darcy_flux");
            for (std::size_t m = 0; m < ec.wall_face.size(); ++m)
                wall_col[ec.wall_face[m]] = lo_lam + static_cast<int>(m);
        }

        // Darcy flux derivative scatter into the pressure rows through div.
        for (int f = 0; f < grid.num_faces(); ++f) {
            double dp0, dp1, dc0, dc1, dl;
            const double q = mobility_flux(node.id, f, p, c, lam_data, &dp0, &dp1, &dc0,
                                           &dc1, &dl);
            const int c0 = grid.face_cells[f][0], c1 = grid.face_cells[f][1];
            const int ca = c0 >= 0 ? c0 : c1;
            struct Ent {
                int col;
                double val;
            };
            std::vector<Ent> dq;
            if (c0 >= 0 && c1 >= 0) {
                dq = {{poff + c0, dp0}, {poff + c1, dp1}, {coff + c0, dc0}, {coff + c1, dc1}};
            } else {
                dq = {{poff + ca, dp0}, {coff + ca, dc0}};
                if (dl != 0 && wall_col[f] >= 0) dq.push_back({wall_col[f], dl});
            }
            // pressure rows: div * q
            for (int slot = 0; slot < 2; ++slot) {
                const int cc = grid.face_cells[f][slot];
                if (cc < 0) continue;
                const double sgn = slot == 0 ? 1.0 : -1.0;
                for (const auto& en : dq)
                    if (en.val != 0) ts.emplace_back(poff + cc, en.col, sgn * en.val);
            }
            // advective part of the concentration rows: d(q c_up)
            if (!nc.is_interface[f]) {
                int cup;
                double bc_up = 0.0;
                bool up_is_cell = true;
                if (c0 >= 0 && c1 >= 0) {
                    cup = nc.upstream[f] == 0 ? c0 : c1;
                } else {
                    const int s = grid.face_sign(f, ca);
                    if (s * q >= 0) {
                        cup = ca;
                    } else {
                        up_is_cell = false;
                        cup = -1;
                        bc_up = ph_.cbc[node.id].is_dir(f) ? ph_.cbc_values[node.id](f) : 0.0;
                    }
                }
                const double cu = up_is_cell ? c(cup) : bc_up;
                for (int slot = 0; slot < 2; ++slot) {
                    const int cc = grid.face_cells[f][slot];
                    if (cc < 0) continue;
                    const double sgn = slot == 0 ? 1.0 : -1.0;
                    for (const auto& en : dq)
                        if (en.val != 0) ts.emplace_back(coff + cc, en.col, sgn * en.val * cu);
                    if (up_is_cell) ts.emplace_back(coff + cc, coff + cup, sgn * q);
                }
            }
        }

        // Diffusion and storage in the concentration rows.
        append_block(ts, SpMat(nc.div * nc.diff.flux), coff, coff);
        const Vec storage_diag =
            ph_.flow.params[node.id].porosity.cwiseProduct(grid.cell_measures) / dt;
        for (int cc = 0; cc < grid.num_cells(); ++cc) {
            double val = storage_diag(cc);
            const double f_src = ph_.flow.params[node.id].source(cc) * grid.cell_measures(cc);
            if (f_src < 0) val -= f_src;  // production removes local concentration
            ts.emplace_back(coff + cc, coff + cc, val);
        }

        // Mortar data columns: darcy into pressure rows, beta+eta into
        // concentration rows, lower-side sources.
        for (int eid : g_.sorted_neighbors(node.id).lower) {
            const auto& e = g_.edges[eid];
            const int lo_b = dofs_.offset(on_edge(eid), "diff_flux");
            const int lo_e = dofs_.offset(on_edge(eid), "adv_flux");
            const SpMat scat = SpMat(nc.div * nc.diff.bound_flux * e.mortar.to_primary_int);
            append_block(ts, scat, coff, lo_b);
            append_block(ts, scat, coff, lo_e);
        }
        for (int eid : g_.sorted_neighbors(node.id).higher) {
            const int lo_lam = dofs_.offset(on_edge(eid), "darcy_flux");
            const int lo_b = dofs_.offset(on_edge(eid), "diff_flux");
            const int lo_e = dofs_.offset(on_edge(eid), "adv_flux");
            append_block(ts, edges_[eid].into_lower, poff, lo_lam, -1.0);
            append_block(ts, edges_[eid].into_lower, coff, lo_b, -1.0);
            append_block(ts, edges_[eid].into_lower, coff, lo_e, -1.0);
        }
    }

    // Interface law rows.
    for (const auto& e : g_.edges) {
        const EdgeCache& ec = edges_[e.id];
        const int nm = e.mortar.num_cells();
        const int lo_lam = dofs_.offset(on_edge(e.id), "darcy_flux");
        const int lo_b = dofs_.offset(on_edge(e.id), "diff_flux");
        const int lo_e = dofs_.offset(on_edge(e.id), "adv_flux");
        const int hp = dofs_.offset(on_node(e.high), "pressure");
        const int hc = dofs_.offset(on_node(e.high), "concentration");
        const int lp = dofs_.offset(on_node(e.low), "pressure");
        const int lc = dofs_.offset(on_node(e.low), "concentration");
        const Vec lam = edge_values(x, "darcy_flux", e.id);
        const Vec beta = edge_values(x, "diff_flux", e.id);
        const Vec c_h = node_values(x, "concentration", e.high);
        const Vec c_l = node_values(x, "concentration", e.low);
        const Vec ci_l = ec.lower_avg * c_l;
        const NodeCache& nch = nodes_[e.high];
        const Grid& gh = g_.nodes[e.high].grid;

        for (int m = 0; m < nm; ++m) {
            const int f = ec.wall_face[m];
            const int cf = ec.adj_cell[m];
            const int slot = gh.face_cells[f][0] >= 0 ? 0 : 1;
            const double th = nch.half_trans(slot, f);
            const double w_m = ph_.flow.weight[e.id](m);
            const double r0 = ph_.flow.resistance[e.id](m) / ph_.flow.viscosity;
            const double cbar = 0.5 * (c_h(cf) + ci_l(m));
            const double mu_j = ph_.mu(cbar), dmu_j = ph_.dmu(cbar);
            const double mu_cf = ph_.mu(c_h(cf)), dmu_cf = ph_.dmu(c_h(cf));

            // lambda row
            ts.emplace_back(lo_lam + m, lo_lam + m, mu_j * r0 + w_m * mu_cf / th);
            ts.emplace_back(lo_lam + m, hp + cf, -w_m);
            for (const auto& [col, val] : ec.lower_rows[m])
                ts.emplace_back(lo_lam + m, lp + col, w_m * val);
            // chain through the interface viscosity and the trace viscosity
            ts.emplace_back(lo_lam + m, hc + cf,
                            lam(m) * r0 * dmu_j * 0.5 + w_m * lam(m) * dmu_cf / th);
            for (const auto& [col, val] : ec.lower_rows[m])
                ts.emplace_back(lo_lam + m, lc + col, lam(m) * r0 * dmu_j * 0.5 * val);

            // beta row
            if (ph_.delta[e.id](m) > 0) {
                const double thd = half_transmissibilities(
                                       gh, ph_.flow.params[e.high].diffusivity)(slot, f);
                ts.emplace_back(lo_b + m, lo_b + m,
                                1.0 / ph_.delta[e.id](m) + w_m / thd);
                ts.emplace_back(lo_b + m, hc + cf, -w_m);
                for (const auto& [col, val] : ec.lower_rows[m])
                    ts.emplace_back(lo_b + m, lc + col, w_m * val);
            } else {
                ts.emplace_back(lo_b + m, lo_b + m, 1.0);
            }

            // eta row
            ts.emplace_back(lo_e + m, lo_e + m, 1.0);
            const double up = ec.upstream_high[m] ? c_h(cf) : ci_l(m);
            ts.emplace_back(lo_e + m, lo_lam + m, -up);
            if (ec.upstream_high[m]) {
                ts.emplace_back(lo_e + m, hc + cf, -lam(m));
            } else {
                for (const auto& [col, val] : ec.lower_rows[m])
                    ts.emplace_back(lo_e + m, lc + col, -lam(m) * val);
            }
            (void)beta;
        }
    }
    return from_triplets(size(), size(), ts);
}

Vec TransportSystem::initial_state(double c0) const
{
    // Linear flow solve at uniform concentration c0 for a consistent start.
    FlowPhysics fl = ph_.flow;
    const double mu0 = ph_.mu(c0);
    const double scale = mu0 / fl.viscosity;
    for (auto& par : fl.params) par.viscosity *= scale;
    for (auto& rr : fl.resistance) rr *= scale;
    fl.viscosity = mu0;
    FlowResult fr = run_flow(g_, fl, Scheme::Tpfa);

    Vec x = Vec::Zero(dofs_.size());
    for (const auto& node : g_.nodes) {
        x.segment(dofs_.offset(on_node(node.id), "pressure"), node.grid.num_cells()) =
            fr.pressure[node.id];
        x.segment(dofs_.offset(on_node(node.id), "concentration"), node.grid.num_cells())
            .setConstant(c0);
    }
    for (const auto& e : g_.edges) {
        x.segment(dofs_.offset(on_edge(e.id), "darcy_flux"), e.mortar.num_cells()) =
            fr.mortar_flux[e.id];
        x.segment(dofs_.offset(on_edge(e.id), "adv_flux"), e.mortar.num_cells()) =
            fr.mortar_flux[e.id] * c0;
        // beta stays zero at uniform concentration
    }
    return x;
}

Vec TransportSystem::initial_state(const Vec&) const { return initial_state(0.0); }

double TransportSystem::boundary_species_outflow(const Vec& x) const
{
    double out = 0;
    for (const auto& node : g_.nodes) {
        if (node.dim == 0) continue;
        const Grid& grid = node.grid;
        const NodeCache& nc = nodes_[node.id];
        const Vec p = node_values(x, "pressure", node.id);
        const Vec c = node_values(x, "concentration", node.id);
        Vec lam_data = Vec::Zero(grid.num_faces());
        for (int eid : g_.sorted_neighbors(node.id).lower)
            lam_data += g_.edges[eid].mortar.to_primary_int
                      * edge_values(x, "darcy_flux", eid);
        const Vec g_cdata = ph_.cbc_values[node.id];
        for (int f = 0; f < grid.num_faces(); ++f) {
            if (!grid.is_boundary_face(f)) continue;
            if (nc.is_interface[f]) continue;
            if (!(grid.face_tags[f] & TagDomainBoundary)) continue;
            const int cc = grid.boundary_cell(f);
            const int s = grid.face_sign(f, cc);
            const double q = mobility_flux(node.id, f, p, c, lam_data);
            const double q_out = s * q;
            const double c_up = q_out >= 0
                                    ? c(cc)
                                    : (ph_.cbc[node.id].is_dir(f) ? g_cdata(f) : 0.0);
            double w_diff = 0;
            // diffusive part: one-sided TPFA flux for Dirichlet faces
            if (ph_.cbc[node.id].is_dir(f)) {
                const double thd = half_transmissibilities(
                    grid, ph_.flow.params[node.id].diffusivity)(
                    grid.face_cells[f][0] >= 0 ? 0 : 1, f);
                w_diff = thd * (c(cc) - g_cdata(f));
            } else {
                w_diff = g_cdata(f);  // prescribed outward diffusive flux
            }
            out += q_out * c_up + w_diff;
        }
    }
    return out;
}

double TransportResult::fracture_average_concentration(const MixedDimGraph& g, int step) const
{
    double num = 0, den = 0;
    for (const auto& node : g.nodes) {
        if (node.dim != 1) continue;
        num += concentration[step][node.id].dot(node.grid.cell_measures);
        den += node.grid.cell_measures.sum();
    }
    return den > 0 ? num / den : 0.0;
}

TransportResult run_flow_transport(const MixedDimGraph& g, const TransportPhysics& ph,
                                   double end_time, const NewtonConfig& newton)
{
    TransportSystem sys(g, ph);
    Vec x = sys.previous();
    TransportResult out;

    const int nsteps = static_cast<int>(std::round(end_time / ph.dt));
    auto record = [&](double t, int iters, double mass_err) {
        out.times.push_back(t);
        std::vector<Vec> pr(g.num_nodes()), cc(g.num_nodes());
        std::vector<Vec> lf(g.num_edges()), bf(g.num_edges()), ef(g.num_edges());
        for (const auto& node : g.nodes) {
            pr[node.id] = sys.node_values(x, "pressure", node.id);
            cc[node.id] = sys.node_values(x, "concentration", node.id);
        }
        for (const auto& e : g.edges) {
            lf[e.id] = sys.edge_values(x, "darcy_flux", e.id);
            bf[e.id] = sys.edge_values(x, "diff_flux", e.id);
            ef[e.id] = sys.edge_values(x, "adv_flux", e.id);
        }
        out.pressure.push_back(std::move(pr));
        out.concentration.push_back(std::move(cc));
        out.darcy_flux.push_back(std::move(lf));
        out.diff_flux.push_back(std::move(bf));
        out.adv_flux.push_back(std::move(ef));
        out.reports.push_back({t, iters, mass_err});
    };
    record(0.0, 0, 0.0);

    auto total_mass = [&](const Vec& state) {
        double m = 0;
        for (const auto& node : g.nodes) {
            if (node.dim == 0) continue;
            const Vec c = sys.node_values(state, "concentration", node.id);
            m += ph.flow.params[node.id]
                     .porosity.cwiseProduct(node.grid.cell_measures)
                     .dot(c);
        }
        return m;
    };

    for (int step = 1; step <= nsteps; ++step) {
        sys.set_previous(x);
        const double m_before = total_mass(x);
        NewtonReport rep = newton_solve(sys, x, newton);
        if (!rep.converged)
            throw SolverError("transport step " + std::to_string(step)
                              + " failed: " + rep.failure);

        // Global species balance: mass change vs boundary + source terms.
        double influx = 0;
        for (const auto& node : g.nodes) {
            if (node.dim == 0) continue;
            const Grid& grid = node.grid;
            const Vec c = sys.node_values(x, "concentration", node.id);
            const auto& par = ph.flow.params[node.id];
            for (int cc = 0; cc < grid.num_cells(); ++cc) {
                const double f_src = par.source(cc) * grid.cell_measures(cc);
                influx += f_src >= 0 ? f_src * ph.source_conc[node.id](cc) : f_src * c(cc);
            }
        }
        const double outflow = sys.boundary_species_outflow(x);
        const double m_after = total_mass(x);
        const double scale =
            std::max({std::abs(m_after), std::abs(m_before), std::abs(influx) * ph.dt,
                      std::abs(outflow) * ph.dt, 1e-300});
        const double mass_err =
            std::abs((m_after - m_before) / ph.dt - influx + outflow) * ph.dt / scale;
        record(step * ph.dt, rep.iterations, mass_err);
    }
    return out;
}

}  // namespace dfm
