#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <dfm2d/models/transport.hpp>

using namespace dfm;

namespace {

OuterBC left_right_drop(double p_left, double p_right)
{
    return [=](const Vec2& x) -> std::pair<BC, double> {
        if (x.x() < 1e-12) return {BC::Dirichlet, p_left};
        if (x.x() > 1 - 1e-12) return {BC::Dirichlet, p_right};
        return {BC::Neumann, 0.0};
    };
}

std::function<double(Vec2)> inlet_left(double c_in)
{
    return [=](Vec2 x) { return x.x() < 1e-12 ? c_in : 0.0; };
}

MixedDimGraph two_fracture_graph(int refinement = 1)
{
    FractureNetwork2 net({{{0.15, 0.35}, {0.85, 0.45}}, {{0.2, 0.7}, {0.8, 0.6}}},
                         Rect{0, 0, 1, 1});
    return build_mixed_grid(net, {1e-9, 0.13, 0.2}, refinement, 0);
}

TransportPhysics physics_on(const MixedDimGraph& g, double dt, double inlet = 1.0,
                            double interface_diff = 1e-3)
{
    FlowPhysics fl = make_flow_physics(
        const_cast<MixedDimGraph&>(g), 1.0,
        std::vector<FracturePhysics>(2, {1e3, 1e3, 1e-2}), left_right_drop(1.0, 0.0));
    return make_transport_physics(g, fl, 1e-2, 1e-2, interface_diff, inlet_left(inlet), dt);
}

}  // namespace

TEST_CASE("transport jacobian matches central finite differences")
{
    MixedDimGraph g = two_fracture_graph();
    TransportPhysics ph = physics_on(g, 0.05);
    TransportSystem sys(g, ph);

    // randomized smooth state away from upwind kinks: start from the
    // consistent initial state and perturb concentrations moderately
    Vec x = sys.initial_state(0.3);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (const auto& node : g.nodes) {
        const int off = sys.dofs().offset(on_node(node.id), "concentration");
        for (int c = 0; c < node.grid.num_cells(); ++c) x(off + c) += 0.3 + u(rng);
    }
    sys.set_previous(x);
    const double err = jacobian_fd_error(sys, x, 3, 1e-7, 5);
    CHECK(err < 1e-6);
}

TEST_CASE("zero concentration everywhere: pressures equal the pure-flow solution")
{
    MixedDimGraph g = two_fracture_graph();
    TransportPhysics ph = physics_on(g, 0.1, /*inlet=*/0.0);
    NewtonConfig ncfg;
    ncfg.tol = 1e-11;
    TransportResult tr = run_flow_transport(g, ph, 0.3, ncfg);

    FlowResult fr = run_flow(g, ph.flow, Scheme::Tpfa);
    for (std::size_t step = 0; step < tr.times.size(); ++step) {
        for (const auto& node : g.nodes) {
            CHECK((tr.concentration[step][node.id].lpNorm<Eigen::Infinity>()) < 1e-10);
            CHECK((tr.pressure[step][node.id] - fr.pressure[node.id]).lpNorm<Eigen::Infinity>()
                  < 1e-9);
        }
    }
}

TEST_CASE("pure advection keeps concentrations in [0,1]")
{
    MixedDimGraph g = two_fracture_graph();
    FlowPhysics fl = make_flow_physics(g, 1.0, std::vector<FracturePhysics>(2, {1e3, 1e3, 1e-2}),
                                       left_right_drop(1.0, 0.0));
    // no diffusion anywhere, no interface diffusion
    TransportPhysics ph = make_transport_physics(g, fl, 0.0, 0.0, 0.0, inlet_left(1.0), 0.08);
    TransportResult tr = run_flow_transport(g, ph, 0.8);
    for (std::size_t step = 0; step < tr.times.size(); ++step) {
        for (const auto& node : g.nodes) {
            if (node.dim == 0) continue;
            CHECK(tr.concentration[step][node.id].minCoeff() > -1e-12);
            CHECK(tr.concentration[step][node.id].maxCoeff() < 1.0 + 1e-12);
        }
    }
    // the front actually moves: fracture concentration grows
    CHECK(tr.fracture_average_concentration(g, static_cast<int>(tr.times.size()) - 1) > 0.05);
}

TEST_CASE("global species balance holds at every step")
{
    MixedDimGraph g = two_fracture_graph();
    TransportPhysics ph = physics_on(g, 0.1);
    NewtonConfig ncfg;
    ncfg.tol = 1e-10;
    TransportResult tr = run_flow_transport(g, ph, 0.5, ncfg);
    for (const auto& rep : tr.reports) {
        CHECK(rep.mass_error < 1e-7);
        CHECK(rep.newton_iterations <= 12);
    }
}

TEST_CASE("matching and 2:1-refined fracture grids agree on average concentration")
{
    MixedDimGraph g1 = two_fracture_graph(1);
    MixedDimGraph g2 = two_fracture_graph(2);
    TransportPhysics p1 = physics_on(g1, 0.1);
    TransportPhysics p2 = physics_on(g2, 0.1);
    TransportResult r1 = run_flow_transport(g1, p1, 1.0);
    TransportResult r2 = run_flow_transport(g2, p2, 1.0);

    double num = 0, den = 0;
    for (std::size_t s = 0; s < r1.times.size(); ++s) {
        const double a = r1.fracture_average_concentration(g1, static_cast<int>(s));
        const double b = r2.fracture_average_concentration(g2, static_cast<int>(s));
        num += (a - b) * (a - b);
        den += a * a;
    }
    CHECK(std::sqrt(num) <= 0.05 * std::sqrt(den) + 1e-12);
}
