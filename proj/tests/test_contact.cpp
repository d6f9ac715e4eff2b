#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <dfm2d/models/poromech.hpp>

using namespace dfm;

namespace {

// KKT form of the contact conditions, opening positive: normal
// complementarity and Coulomb friction with slip antiparallel to the
// tangential traction.
bool kkt_satisfied(const ContactPointState& s, double F, double tol)
{
    const double b = -F * s.sigma_n;
    const bool normal_ok = s.jump_n >= -tol && s.sigma_n <= tol
                        && std::abs(s.jump_n * s.sigma_n) <= tol;
    if (!normal_ok) return false;
    if (std::abs(s.sigma_t) > b + tol) return false;
    if (std::abs(s.sigma_t) < b - tol) {
        // strictly inside the cone: no slip
        if (std::abs(s.djump_t) > tol) return false;
    } else if (std::abs(s.djump_t) > tol) {
        // sliding: traction at the bound, antiparallel to the increment
        if (std::abs(std::abs(s.sigma_t) - b) > tol) return false;
        if (s.sigma_t * s.djump_t > tol) return false;
    }
    // open fractures carry no traction at all
    if (s.jump_n > tol && std::abs(s.sigma_t) > tol) return false;
    return true;
}

}  // namespace

TEST_CASE("contact residual vanishes exactly on the contact conditions (brute force)")
{
    const double c_n = 1.0, c_t = 1.0, F = 0.6, tol = 1e-10;
    std::vector<double> sig_n, sig_t, u_n, du_t;
    for (int i = 0; i <= 9; ++i) {
        sig_n.push_back(-1.0 + i * 0.25);   // includes 0 and positive values
        sig_t.push_back(-1.2 + i * 0.3);
        u_n.push_back(-0.5 + i * 0.17);
        du_t.push_back(-0.9 + i * 0.23);
    }
    int checked = 0, violations = 0;
    for (double sn : sig_n)
        for (double st : sig_t)
            for (double un : u_n)
                for (double dt : du_t) {
                    ContactPointState s{sn, st, un, dt};
                    const bool ncp_zero =
                        contact_residual(s, c_n, c_t, F).lpNorm<Eigen::Infinity>() <= tol;
                    const bool kkt = kkt_satisfied(s, F, tol);
                    if (ncp_zero != kkt) ++violations;
                    ++checked;
                }
    CHECK(checked >= 10000);
    CHECK(violations == 0);
}

TEST_CASE("contact classification covers the spec cases")
{
    const double c_n = 1.0, c_t = 1.0, F = 0.5;
    // traction-free fracture: open
    CHECK(classify_contact({0.0, 0.0, 0.3, 0.0}, c_n, c_t, F).mode == ContactMode::Open);
    // compression with no shear: stick
    CHECK(classify_contact({-1.0, 0.0, 0.0, 0.0}, c_n, c_t, F).mode == ContactMode::Stick);
    // shear beyond the friction bound: slip
    CHECK(classify_contact({-1.0, 0.9, 0.0, 0.0}, c_n, c_t, F).mode == ContactMode::Slip);
}

TEST_CASE("single-cell contact toy matches a brute-force algebraic solution")
{
    // One fracture cell with a linear elastic response and the contact
    // conditions. Signs follow the wall-traction convention of the contact
    // variable: slip relaxes the tangential traction toward zero magnitude,
    // opening drives the normal traction further negative, which keeps the
    // complementarity problem uniquely solvable. Brute-force: scan the jump
    // plane for the point where the self-classifying residual vanishes;
    // compare with the semi-smooth active-set iteration on the same algebra.
    const double c_n = 1.0, c_t = 1.0, F = 0.5, k_e = 2.0;
    const Vec2 sigma_app{-1.4, -1.0};  // (tangential, normal): shear above the bound

    auto sigma_of = [&](const Vec2& j) {
        return Vec2(sigma_app.x() + k_e * j.x(), sigma_app.y() - k_e * j.y());
    };
    auto state_of = [&](const Vec2& j) {
        const Vec2 s = sigma_of(j);
        return ContactPointState{s.y(), s.x(), j.y(), j.x()};
    };

    // brute force over the jump plane
    Vec2 best_j{0, 0};
    double best = 1e300;
    const int n = 2001;
    for (int i = 0; i < n; ++i) {
        for (int jdx = 0; jdx < n; jdx += 1) {
            const Vec2 j{-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * jdx / (n - 1)};
            const double r =
                contact_residual(state_of(j), c_n, c_t, F).lpNorm<Eigen::Infinity>();
            if (r < best) {
                best = r;
                best_j = j;
            }
        }
    }

    // semi-smooth iteration: classify, solve the affine system, repeat
    Vec2 j{0, 0};
    const Eigen::Matrix2d elastic = Eigen::Vector2d(k_e, -k_e).asDiagonal();
    for (int it = 0; it < 20; ++it) {
        const ContactBranch b = classify_contact(state_of(j), c_n, c_t, F);
        const ContactRows rows = contact_rows(b, 0.0, c_n, c_t, F);
        // residual(j) = Cs (sigma_app + E j) + Cj j + rhs = 0
        Eigen::Matrix2d a = rows.coef_sigma * elastic + rows.coef_jump;
        Eigen::Vector2d rhs = -(rows.coef_sigma * Eigen::Vector2d(sigma_app.x(), sigma_app.y())
                                + rows.rhs);
        j = a.fullPivLu().solve(rhs);
    }
    CHECK(contact_residual(state_of(j), c_n, c_t, F).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(j.x() == doctest::Approx(best_j.x()).epsilon(2e-3));
    CHECK(j.y() == doctest::Approx(best_j.y()).epsilon(2e-3));

    // slip state: traction on the bound, antiparallel, no opening
    const Vec2 s = sigma_of(j);
    CHECK(s.y() < 0);
    CHECK(std::abs(s.x()) == doctest::Approx(-F * s.y()).epsilon(1e-10));
    CHECK(s.x() * j.x() < 0);
    CHECK(std::abs(j.y()) < 1e-12);
}

namespace {

MixedDimGraph one_fracture_domain()
{
    // 100 m square with a single 30-degree fracture in the middle
    const double L = 100.0;
    const Vec2 c{0.5 * L, 0.5 * L};
    const Vec2 d{std::cos(M_PI / 6), std::sin(M_PI / 6)};
    FractureNetwork2 net({{c - 15.0 * d, c + 15.0 * d}}, Rect{0, 0, L, L});
    return build_mixed_grid(net, {1e-6, 9.0, 22.0}, 1, 0);
}

PoromechPhysics stressed_physics(const MixedDimGraph& g, double sxx, double syy,
                                 double friction = 0.5)
{
    const double L = 100.0;
    MechanicsParameters mech = MechanicsParameters::uniform(
        g.nodes[g.matrix_node].grid, 1.0e9, 1.0e9);
    mech.biot_alpha = 0.8;
    mech.storage = 1e-10;
    mech.friction = friction;
    mech.c_num_n = mech.c_num_t = 1e8;
    mech.residual_aperture = 1e-4;

    OuterBC flow_outer = [](const Vec2&) -> std::pair<BC, double> {
        return {BC::Dirichlet, 0.0};
    };
    MechOuterBC mech_outer = [=](const Vec2& x, std::array<BC, 2>& kind, Vec2& val) {
        if (x.y() < 1e-9) {  // clamp the bottom
            kind = {BC::Dirichlet, BC::Dirichlet};
            val = {0, 0};
            return;
        }
        kind = {BC::Neumann, BC::Neumann};
        Vec2 n{0, 0};
        if (x.x() < 1e-9) n = {-1, 0};
        else if (x.x() > L - 1e-9) n = {1, 0};
        else n = {0, 1};
        val = {sxx * n.x(), syy * n.y()};  // traction density sigma . n
    };
    // permeability given as k / mu (unit viscosity keeps the scales kind)
    return make_poromech_physics(g, 1e-12, {{1e-7, 1e-7, 1e-4}}, flow_outer, mech,
                                 mech_outer, 10000.0);
}

}  // namespace

TEST_CASE("isotropic compression without injection: all cells stick, zero jumps")
{
    MixedDimGraph g = one_fracture_domain();
    PoromechPhysics ph = stressed_physics(g, -1.0e7, -1.0e7);

    NewtonConfig cfg;
    cfg.tol = 1e-5;
    PoromechResult res = run_biot_contact(g, ph, 0, 0.0, 0.0, 3 * ph.dt, cfg);

    const auto& h = res.fractures[0];
    for (std::size_t i = 0; i < h.time.size(); ++i) {
        CHECK(h.num_slip[i] == 0);
        CHECK(h.num_open[i] == 0);
        CHECK(h.jump_n_norm[i] < 1e-10);
        CHECK(h.jump_t_norm[i] < 1e-10);
    }
}

TEST_CASE("poromech jacobian matches finite differences away from kinks")
{
    MixedDimGraph g = one_fracture_domain();
    PoromechPhysics ph = stressed_physics(g, -1.5e7, -1.0e7);
    PoromechSystem sys(g, ph);

    // equilibrium state, then a smooth perturbation
    Vec x = Vec::Zero(sys.size());
    sys.set_steady(true);
    NewtonConfig cfg;
    cfg.tol = 1e-5;
    NewtonReport rep = newton_solve(sys, x, cfg);
    REQUIRE(rep.converged);
    sys.set_steady(false);
    sys.set_previous(x);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Vec dx(sys.size());
    for (int i = 0; i < sys.size(); ++i) dx(i) = u(rng);
    // scale perturbation per block so every variable moves a little
    for (const auto& b : sys.dofs().blocks()) {
        const double mag = std::max(1.0, x.segment(b.offset, b.size).lpNorm<Eigen::Infinity>());
        dx.segment(b.offset, b.size) *= 1e-4 * mag;
    }
    x += dx;
    sys.begin_iteration(x);
    const double err = jacobian_fd_error(sys, x, 3, 1e-5, 11);
    CHECK(err < 1e-6);
}

TEST_CASE("injection against anisotropic stress triggers slip; shut-in keeps tangential jumps")
{
    MixedDimGraph g = one_fracture_domain();
    PoromechPhysics ph = stressed_physics(g, -1.5e7, -1.0e7, /*friction=*/0.3);

    NewtonConfig cfg;
    cfg.tol = 2e-5;
    cfg.max_iter = 60;
    const double rate = 1.0e-3;  // injected volume per time
    PoromechResult res = run_biot_contact(g, ph, 0, rate, 5 * ph.dt, 15 * ph.dt, cfg);

    const auto& h = res.fractures[0];
    // slip appears during injection
    int peak_slip = 0;
    double peak_jt = 0, peak_jn = 0;
    for (std::size_t i = 0; i < h.time.size(); ++i) {
        if (h.time[i] <= 5 * ph.dt + 1e-9) {
            peak_slip = std::max(peak_slip, h.num_slip[i]);
            peak_jt = std::max(peak_jt, h.jump_t_norm[i]);
            peak_jn = std::max(peak_jn, h.jump_n_norm[i]);
        }
    }
    CHECK(peak_slip > 0);
    CHECK(peak_jt > 0);

    // after shut-in: normal jumps decay, tangential jumps persist
    const double jn_end = h.jump_n_norm.back();
    const double jt_end = h.jump_t_norm.back();
    CHECK(jn_end < 0.5 * std::max(peak_jn, 1e-300));
    CHECK(jt_end > 0.5 * peak_jt);
}
