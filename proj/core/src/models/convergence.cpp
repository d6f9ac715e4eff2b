#include "dfm2d/models/convergence.hpp"

#include <cmath>

#include "dfm2d/errors.hpp"
#include "dfm2d/triangulate.hpp"

namespace dfm {

namespace {

/// Point-in-cell locator over a uniform bucket grid.
class CellLocator {
public:
    explicit CellLocator(const Grid& g) : g_(&g)
    {
        lo_ = g.nodes.rowwise().minCoeff();
        hi_ = g.nodes.rowwise().maxCoeff();
        nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(g.num_cells()))));
        buckets_.resize(nb_ * nb_);
        for (int c = 0; c < g.num_cells(); ++c) {
            // conservative: insert the cell into buckets covering its bbox
            Vec2 bl(1e300, 1e300), tr(-1e300, -1e300);
            for (int f : g.cell_face_list(c))
                for (int n : g.face_nodes[f]) {
                    bl = bl.cwiseMin(g.nodes.col(n));
                    tr = tr.cwiseMax(g.nodes.col(n));
                }
            const auto [i0, j0] = index(bl);
            const auto [i1, j1] = index(tr);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) buckets_[j * nb_ + i].push_back(c);
        }
    }

    int locate(const Vec2& p) const
    {
        const auto [i, j] = index(p);
        int best = -1;
        double best_d = 1e300;
        for (int c : buckets_[j * nb_ + i]) {
            if (inside(c, p)) return c;
            const double d = (g_->cell_centers.col(c) - p).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (best >= 0) return best;
        // fallback: nearest center globally
        for (int c = 0; c < g_->num_cells(); ++c) {
            const double d = (g_->cell_centers.col(c) - p).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    }

private:
    std::pair<int, int> index(const Vec2& p) const
    {
        const double wx = std::max(hi_.x() - lo_.x(), 1e-300);
        const double wy = std::max(hi_.y() - lo_.y(), 1e-300);
        int i = static_cast<int>((p.x() - lo_.x()) / wx * nb_);
        int j = static_cast<int>((p.y() - lo_.y()) / wy * nb_);
        return {std::clamp(i, 0, nb_ - 1), std::clamp(j, 0, nb_ - 1)};
    }
    bool inside(int c, const Vec2& p) const
    {
        std::vector<int> corners;
        for (int f : g_->cell_face_list(c))
            for (int n : g_->face_nodes[f])
                if (std::find(corners.begin(), corners.end(), n) == corners.end())
                    corners.push_back(n);
        const Vec2 a = g_->nodes.col(corners[0]), b = g_->nodes.col(corners[1]),
                   d = g_->nodes.col(corners[2]);
        const double s = cross2(b - a, d - a);
        const double w0 = cross2(b - p, d - p) / s;
        const double w1 = cross2(d - p, a - p) / s;
        const double w2 = cross2(a - p, b - p) / s;
        const double eps = -1e-10;
        return w0 >= eps && w1 >= eps && w2 >= eps;
    }

    const Grid* g_;
    Vec2 lo_, hi_;
    int nb_;
    std::vector<std::vector<int>> buckets_;
};

}  // namespace

double lsq_rate(const std::vector<double>& h, const std::vector<double>& err)
{
    if (h.size() != err.size() || h.size() < 2)
        throw Error("lsq_rate: need at least two levels");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(err[i] > 0)) continue;  // identical solutions give zero error
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FractureNetwork2 benchmark_network()
{
    // Reconstructed benchmark geometry: conductive and blocking fractures
    // with crossings, a T contact and an isolated fracture.
    std::vector<Segment> f{
        {{0.05, 0.42}, {0.62, 0.55}},   // 0 conductive
        {{0.15, 0.91}, {0.40, 0.62}},   // 1 conductive
        {{0.05, 0.70}, {0.45, 0.75}},   // 2 blocking, crosses 1
        {{0.50, 0.20}, {0.95, 0.30}},   // 3 conductive
        {{0.55, 0.55}, {0.95, 0.85}},   // 4 blocking, crossed by the profile line
        {{0.70, 0.50}, {0.90, 0.70}},   // 5 conductive, crosses 4
        {{0.20, 0.10}, {0.40, 0.35}},   // 6 conductive, isolated
        {{0.32, 0.47}, {0.35, 0.90}},   // 7 blocking, T contact on 0, crosses 2
    };
    return FractureNetwork2(std::move(f), Rect{0, 0, 1, 1});
}

std::vector<FracturePhysics> benchmark_fracture_physics()
{
    const double ap = 1e-4;
    auto cond = FracturePhysics{1e4, 1e4, ap};
    auto block = FracturePhysics{1e-4, 1e-4, ap};
    return {cond, cond, block, cond, block, cond, cond, block};
}

FlowPhysics benchmark_physics(const MixedDimGraph& g)
{
    OuterBC outer = [](const Vec2& x) -> std::pair<BC, double> {
        if (x.x() < 1e-12) return {BC::Dirichlet, 4.0};
        if (x.x() > 1 - 1e-12) return {BC::Dirichlet, 1.0};
        return {BC::Neumann, 0.0};
    };
    return make_flow_physics(g, 1.0, benchmark_fracture_physics(), outer);
}

namespace {

struct BenchSolution {
    MixedDimGraph graph;
    FlowResult flow;
};

BenchSolution solve_benchmark(double h, Scheme scheme, std::uint64_t seed)
{
    BenchSolution s;
    s.graph = build_mixed_grid(benchmark_network(), {1e-9, h, 1.6 * h}, 1, seed);
    FlowPhysics ph = benchmark_physics(s.graph);
    s.flow = run_flow(s.graph, ph, scheme);
    return s;
}

}  // namespace

FlowBenchmarkResult run_flow_benchmark(Scheme scheme, int levels, double h0,
                                       std::uint64_t seed)
{
    if (levels < 2) throw Error("flow benchmark: need at least 2 levels");
    // Reference: one further refinement, always Mpfa.
    const double h_ref = h0 / std::pow(2.0, levels);
    BenchSolution ref = solve_benchmark(h_ref, Scheme::Mpfa, seed);
    const Grid& gref = ref.graph.nodes[ref.graph.matrix_node].grid;
    CellLocator locator(gref);

    // Reference fracture data: per fracture, cells sorted by arc parameter.
    struct FracRef {
        Vec2 tangent;
        std::vector<std::pair<double, double>> stations;  // (s, p)
    };
    std::vector<FracRef> fref(ref.graph.fracture_nodes.size());
    for (std::size_t f = 0; f < ref.graph.fracture_nodes.size(); ++f) {
        const int nid = ref.graph.fracture_nodes[f];
        const Grid& g1 = ref.graph.nodes[nid].grid;
        const auto& e = ref.graph.edges[ref.graph.sorted_neighbors(nid).higher[0]];
        fref[f].tangent = e.tangent;
        for (int c = 0; c < g1.num_cells(); ++c)
            fref[f].stations.emplace_back(e.tangent.dot(g1.cell_centers.col(c)),
                                          ref.flow.pressure[nid](c));
        std::sort(fref[f].stations.begin(), fref[f].stations.end());
    }
    auto frac_ref_at = [&](int f, double s) {
        const auto& st = fref[f].stations;
        auto it = std::lower_bound(st.begin(), st.end(), std::make_pair(s, -1e300));
        if (it == st.end()) return st.back().second;
        if (it == st.begin()) return st.front().second;
        return std::abs(it->first - s) < std::abs((it - 1)->first - s) ? it->second
                                                                       : (it - 1)->second;
    };

    FlowBenchmarkResult out;
    for (int l = 0; l < levels; ++l) {
        const double h = h0 / std::pow(2.0, l);
        BenchSolution sol = solve_benchmark(h, scheme, seed);
        const Grid& gm = sol.graph.nodes[sol.graph.matrix_node].grid;
        const Vec& p = sol.flow.pressure[sol.graph.matrix_node];

        double num = 0, den = 0;
        for (int c = 0; c < gm.num_cells(); ++c) {
            const double pr = ref.flow.pressure[ref.graph.matrix_node](
                locator.locate(gm.cell_centers.col(c)));
            num += gm.cell_measures(c) * (p(c) - pr) * (p(c) - pr);
            den += gm.cell_measures(c) * pr * pr;
        }
        out.matrix.h.push_back(h);
        out.matrix.errors.push_back(std::sqrt(num / den));

        double fnum = 0, fden = 0;
        for (std::size_t f = 0; f < sol.graph.fracture_nodes.size(); ++f) {
            const int nid = sol.graph.fracture_nodes[f];
            const Grid& g1 = sol.graph.nodes[nid].grid;
            const auto& e = sol.graph.edges[sol.graph.sorted_neighbors(nid).higher[0]];
            for (int c = 0; c < g1.num_cells(); ++c) {
                const double s = e.tangent.dot(g1.cell_centers.col(c));
                const double pr = frac_ref_at(static_cast<int>(f), s);
                const double pv = sol.flow.pressure[nid](c);
                fnum += g1.cell_measures(c) * (pv - pr) * (pv - pr);
                fden += g1.cell_measures(c) * pr * pr;
            }
        }
        out.fracture.h.push_back(h);
        out.fracture.errors.push_back(std::sqrt(fnum / fden));

        if (l == levels - 1) {
            const int n = 400;
            out.profile = sample_matrix_pressure(sol.graph, sol.flow, Vec2(0, 0.5),
                                                 Vec2(1, 0.9), n);
            out.profile_s.resize(n);
            for (int i = 0; i < n; ++i)
                out.profile_s[i] = (i + 0.5) / n * (Vec2(1, 0.9) - Vec2(0, 0.5)).norm();
            out.finest_cells = gm.num_cells();
        }
    }
    out.matrix.rate = lsq_rate(out.matrix.h, out.matrix.errors);
    out.fracture.rate = lsq_rate(out.fracture.h, out.fracture.errors);
    return out;
}

double run_sneddon_once(const SneddonConfig& cfg, const Rect& domain,
                        const MeshSizeParams& mp, std::uint64_t seed)
{
    const Vec2 t{std::cos(cfg.beta), std::sin(cfg.beta)};
    FractureNetwork2 net({{cfg.center - 0.5 * cfg.length * t,
                           cfg.center + 0.5 * cfg.length * t}},
                         domain);
    MixedDimGraph g = build_mixed_grid(net, mp, 1, seed);
    const Grid& gh = g.nodes[g.matrix_node].grid;

    MechanicsParameters mech = MechanicsParameters::uniform(gh,
        2.0 * cfg.shear_g * cfg.nu / (1.0 - 2.0 * cfg.nu), cfg.shear_g);
    mech.biot_alpha = 0.0;
    VectorBC bc(gh, BC::Neumann);
    Vec bv = Vec::Zero(2 * gh.num_faces());
    for (int f = 0; f < gh.num_faces(); ++f) {
        if (!gh.is_boundary_face(f)) continue;
        if (gh.face_tags[f] & TagFractureWall) {
            // internal pressure pushes the walls: traction -p0 n_out
            const int s = gh.face_sign(f, gh.boundary_cell(f));
            const Vec2 n_out = s * gh.face_normals.col(f);
            bc.kind[f] = {BC::Neumann, BC::Neumann};
            bv.segment<2>(2 * f) = -cfg.p0 * n_out * gh.face_measures(f);
        } else {
            bc.kind[f] = {BC::Dirichlet, BC::Dirichlet};
            bv.segment<2>(2 * f) = sneddon_boundary_displacement(gh.face_centers.col(f), cfg);
        }
    }
    StressDiscretization d = mpsa(gh, mech, bc);
    SpMat div_v = divergence_vec(gh);
    SpMat a = SpMat(div_v * d.stress);
    Vec rhs = -(div_v * (d.bound_stress * bv));
    Vec u = linear_solve(a, rhs);

    // normal jump from wall displacement traces
    const Vec trace = d.trace_cell * u + d.trace_bound * bv;
    const auto& e = g.edges[0];
    double num = 0, den = 0;
    for (const auto& pr : e.pairs) {
        const Vec2 up{trace(2 * pr.plus_face), trace(2 * pr.plus_face + 1)};
        const Vec2 um{trace(2 * pr.minus_face), trace(2 * pr.minus_face + 1)};
        const double jn = e.normal.dot(up - um);
        const double s = e.tangent.dot(gh.face_centers.col(pr.plus_face) - cfg.center);
        const double exact = sneddon_jump(std::clamp(s, -0.5 * cfg.length, 0.5 * cfg.length),
                                          cfg);
        const double w = gh.face_measures(pr.plus_face);
        num += w * (jn - exact) * (jn - exact);
        den += w * exact * exact;
    }
    return std::sqrt(num / den);
}

ConvergenceTable sneddon_study(const std::vector<double>& angles_deg, int realizations,
                               int levels, double h0, std::uint64_t seed)
{
    ConvergenceTable out;
    SneddonConfig base;
    const Rect domain{0, 0, 1, 1};
    for (int l = 0; l < levels; ++l) {
        const double h = h0 / std::pow(2.0, l);
        double sum = 0;
        int count = 0;
        for (double deg : angles_deg) {
            for (int r = 0; r < realizations; ++r) {
                SneddonConfig cfg = base;
                cfg.beta = deg * M_PI / 180.0;
                const MeshSizeParams mp{1e-9, h, 2.5 * h};
                sum += run_sneddon_once(cfg, domain, mp,
                                        seed + 1000 * l + 10 * r + static_cast<int>(deg));
                ++count;
            }
        }
        out.h.push_back(h);
        out.errors.push_back(sum / count);
    }
    out.rate = lsq_rate(out.h, out.errors);
    return out;
}

MandelRun run_mandel(const MandelConfig& cfg, double h, double dt,
                     const std::vector<double>& sample_times)
{
    // Quarter domain, no fractures.
    FractureNetwork2 net({}, Rect{0, 0, cfg.a, cfg.b});
    MixedDimGraph g = build_mixed_grid(net, {1e-9, h, h}, 1, 0);
    const Grid& gh = g.nodes[g.matrix_node].grid;
    const double gmod = cfg.shear_g();
    const double lam = cfg.young * cfg.nu / ((1 + cfg.nu) * (1 - 2 * cfg.nu));

    MechanicsParameters mech = MechanicsParameters::uniform(gh, lam, gmod);
    mech.biot_alpha = cfg.alpha;
    mech.storage = 1.0 / cfg.biot_modulus;

    OuterBC flow_outer = [&](const Vec2& x) -> std::pair<BC, double> {
        if (x.x() > cfg.a - 1e-9) return {BC::Dirichlet, 0.0};
        return {BC::Neumann, 0.0};
    };
    MechOuterBC mech_outer = [&](const Vec2& x, std::array<BC, 2>& kind, Vec2& val) {
        val = {0, 0};
        if (x.x() < 1e-9) { kind = {BC::Dirichlet, BC::Neumann}; return; }   // symmetry
        if (x.y() < 1e-9) { kind = {BC::Neumann, BC::Dirichlet}; return; }   // symmetry
        if (x.y() > cfg.b - 1e-9) { kind = {BC::Neumann, BC::Dirichlet}; return; }  // plate
        kind = {BC::Neumann, BC::Neumann};  // drained free edge
    };
    PoromechPhysics ph = make_poromech_physics(
        g, cfg.permeability / cfg.viscosity, {}, flow_outer, mech, mech_outer, dt);
    PoromechSystem sys(g, ph);

    // Undrained initial state.
    const double nuu = cfg.undrained_nu();
    const double p0 = cfg.initial_pressure();
    Vec x = Vec::Zero(sys.size());
    {
        const int u_off = sys.dofs().offset(on_node(g.matrix_node), "displacement");
        const int p_off = sys.dofs().offset(on_node(g.matrix_node), "pressure");
        for (int c = 0; c < gh.num_cells(); ++c) {
            const Vec2 xc = gh.cell_centers.col(c);
            x(u_off + 2 * c) = cfg.force * nuu / (2 * gmod * cfg.a) * xc.x();
            x(u_off + 2 * c + 1) = -cfg.force * (1 - nuu) / (2 * gmod * cfg.a) * xc.y();
            x(p_off + c) = p0;
        }
    }

    // Face lists for the time-dependent top boundary.
    std::vector<int> top_faces;
    for (int f = 0; f < gh.num_faces(); ++f)
        if (gh.is_boundary_face(f) && gh.face_centers(1, f) > cfg.b - 1e-9)
            top_faces.push_back(f);

    MandelRun out;
    out.num_cells = gh.num_cells();
    NewtonConfig ncfg;
    ncfg.tol = 1e-8;

    double peak = 0;
    double t = 0;
    std::size_t next_sample = 0;
    const double t_end = sample_times.back();
    Vec base_bv = ph.mech_bc_values;
    const int p_off = sys.dofs().offset(on_node(g.matrix_node), "pressure");
    const int u_off = sys.dofs().offset(on_node(g.matrix_node), "displacement");

    // near-center probe cell for the Mandel-Cryer effect
    int probe = 0;
    double probe_d = 1e300;
    for (int c = 0; c < gh.num_cells(); ++c) {
        const double d = gh.cell_centers(0, c);
        if (d < probe_d) {
            probe_d = d;
            probe = c;
        }
    }

    while (t < t_end - 1e-9) {
        sys.set_previous(x);
        t += dt;
        Vec bv = base_bv;
        const double uy_top = mandel_top_displacement(t, cfg);
        for (int f : top_faces) bv(2 * f + 1) = uy_top;
        sys.set_mech_bc_values(bv);
        NewtonReport rep = poromech_step(sys, x, ncfg);
        if (!rep.converged) throw SolverError("mandel step failed: " + rep.failure);

        peak = std::max(peak, x(p_off + probe));

        if (next_sample < sample_times.size() && t >= sample_times[next_sample] - 1e-9) {
            double pnum = 0, pden = 0, unum = 0, uden = 0;
            Vec pprof(gh.num_cells()), uprof(gh.num_cells());
            for (int c = 0; c < gh.num_cells(); ++c) {
                const Vec2 xc = gh.cell_centers.col(c);
                const MandelPoint mp = mandel_solution(xc.x(), t, cfg);
                const double w = gh.cell_measures(c);
                pprof(c) = x(p_off + c);
                uprof(c) = x(u_off + 2 * c);
                pnum += w * std::pow(x(p_off + c) - mp.pressure, 2);
                pden += w * mp.pressure * mp.pressure;
                unum += w * std::pow(x(u_off + 2 * c) - mp.ux, 2);
                uden += w * mp.ux * mp.ux;
            }
            out.times.push_back(t);
            out.p_err_rel.push_back(std::sqrt(pnum / std::max(pden, 1e-300)));
            out.ux_err_rel.push_back(std::sqrt(unum / std::max(uden, 1e-300)));
            out.p_profiles.push_back(pprof);
            out.ux_profiles.push_back(uprof);
            ++next_sample;
        }
    }
    out.mandel_cryer_peak = peak / p0;
    return out;
}

ConvergenceTable manufactured_tpfa_study(int levels, int n0)
{
    ConvergenceTable out;
    auto exact = [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()); };
    auto forcing = [&](const Vec2& x) { return 2 * M_PI * M_PI * exact(x); };

    for (int l = 0; l < levels; ++l) {
        const int n = n0 << l;
        Grid g = equilateral_triangle_grid(n, n, 1.0 / n);
        FlowParameters par = FlowParameters::uniform(g, 1.0);
        for (int c = 0; c < g.num_cells(); ++c)
            par.source(c) = forcing(g.cell_centers.col(c));
        ScalarBC bc(g, BC::Dirichlet);
        Vec bv = Vec::Zero(g.num_faces());
        for (int f = 0; f < g.num_faces(); ++f)
            if (g.is_boundary_face(f)) bv(f) = exact(g.face_centers.col(f));

        FluxDiscretization d = tpfa(g, par, bc);
        SpMat a = SpMat(divergence(g) * d.flux);
        Vec rhs = par.source.cwiseProduct(g.cell_measures)
                - divergence(g) * (d.bound_flux * bv);
        Vec p = linear_solve(a, rhs);

        double num = 0, den = 0;
        for (int c = 0; c < g.num_cells(); ++c) {
            const double e = p(c) - exact(g.cell_centers.col(c));
            num += g.cell_measures(c) * e * e;
            den += g.cell_measures(c) * std::pow(exact(g.cell_centers.col(c)), 2);
        }
        out.h.push_back(1.0 / n);
        out.errors.push_back(std::sqrt(num / den));
    }
    out.rate = lsq_rate(out.h, out.errors);
    return out;
}

}  // namespace dfm
