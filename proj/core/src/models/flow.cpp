#include "dfm2d/models/flow.hpp"

#include <map>

#include "dfm2d/errors.hpp"

namespace dfm {

FlowPhysics make_flow_physics(const MixedDimGraph& g, double matrix_k,
                              const std::vector<FracturePhysics>& fracs, const OuterBC& outer,
                              double viscosity)
{
    FlowPhysics ph;
    ph.viscosity = viscosity;
    ph.params.resize(g.num_nodes());
    ph.bc.resize(g.num_nodes());
    ph.bc_values.resize(g.num_nodes());

    auto frac_of = [&](int fid) -> const FracturePhysics& {
        if (fid < 0 || fid >= static_cast<int>(fracs.size()))
            throw ConfigError("missing fracture physics for fracture " + std::to_string(fid));
        return fracs[fid];
    };

    for (const auto& node : g.nodes) {
        const Grid& grid = node.grid;
        double k = matrix_k;
        if (node.dim == 1) {
            const auto& fp = frac_of(node.fracture);
            k = fp.k_t * fp.aperture;  // aperture-scaled tangential permeability
        } else if (node.dim == 0) {
            k = 1.0;  // no fluxes live on the point grid
        }
        ph.params[node.id] = FlowParameters::uniform(grid, k, viscosity);

        ScalarBC bc(grid, BC::Neumann);
        Vec bv = Vec::Zero(grid.num_faces());
        for (int f = 0; f < grid.num_faces(); ++f) {
            if (!grid.is_boundary_face(f)) continue;
            const bool on_outer = grid.face_tags[f] & TagDomainBoundary;
            const bool is_wall = grid.face_tags[f] & TagFractureWall;
            const bool is_interface = grid.dim == 1 && grid.face_fracture[f] >= 0;
            if (on_outer && !is_wall) {
                auto [kind, value] = outer(grid.face_centers.col(f));
                bc.kind[f] = kind;
                bv(f) = kind == BC::Neumann ? value * grid.face_measures(f) : value;
            } else if (is_wall || is_interface || (grid.face_tags[f] & TagTip)) {
                bc.kind[f] = BC::Neumann;  // mortar data or no-flow tip
            }
        }
        ph.bc[node.id] = std::move(bc);
        ph.bc_values[node.id] = std::move(bv);
    }

    ph.resistance.resize(g.num_edges());
    ph.weight.resize(g.num_edges());
    for (const auto& e : g.edges) {
        const int nm = e.mortar.num_cells();
        Vec r(nm), w(nm);
        if (g.nodes[e.high].dim == 2) {
            const auto& fp = frac_of(e.fracture);
            r.setConstant(viscosity * fp.aperture / (2.0 * fp.k_n));
            for (int m = 0; m < nm; ++m) w(m) = e.mortar.cell_measures(m);
        } else {
            // 1d-0d interface: harmonic average of the incident fractures'
            // normal permeabilities; cross-section is the branch aperture.
            const auto& info_frac = g.nodes[e.low];
            double inv_sum = 0, ap_sum = 0;
            int count = 0;
            for (const auto& other : g.edges) {
                if (other.pnet_point != e.pnet_point || g.nodes[other.high].dim != 1)
                    continue;
                const auto& fp = frac_of(other.fracture);
                inv_sum += 1.0 / fp.k_n;
                ap_sum += fp.aperture;
                ++count;
            }
            (void)info_frac;
            const double k_harm = count / inv_sum;
            const double mean_ap = ap_sum / count;
            const double cross = frac_of(e.fracture).aperture;
            r.setConstant(viscosity * mean_ap / (2.0 * k_harm));
            w.setConstant(cross);
        }
        ph.resistance[e.id] = std::move(r);
        ph.weight[e.id] = std::move(w);
    }
    return ph;
}

namespace {

struct FlowAssembly {
    DofManager dofs;
    SpMat matrix;
    Vec rhs;
    std::vector<FluxDiscretization> discr;
};

FlowAssembly assemble_flow(const MixedDimGraph& g, const FlowPhysics& phys, Scheme scheme)
{
    FlowAssembly as{DofManager(g), {}, {}, {}};
    for (const auto& node : g.nodes) as.dofs.add_variable(on_node(node.id), "pressure", 1);
    for (const auto& e : g.edges) as.dofs.add_variable(on_edge(e.id), "flux", 1);
    as.dofs.finalize();

    const int n = as.dofs.size();
    std::vector<Triplet> ts;
    as.rhs = Vec::Zero(n);
    as.discr.resize(g.num_nodes());

    for (const auto& node : g.nodes) {
        const int off = as.dofs.offset(on_node(node.id), "pressure");
        const Grid& grid = node.grid;
        const auto& par = phys.params[node.id];

        if (node.dim > 0) {
            as.discr[node.id] = scheme == Scheme::Tpfa ? tpfa(grid, par, phys.bc[node.id])
                                                       : mpfa(grid, par, phys.bc[node.id]);
            const SpMat div = divergence(grid);
            append_block(ts, SpMat(div * as.discr[node.id].flux), off, off);
            as.rhs.segment(off, grid.num_cells()) =
                par.source.cwiseProduct(grid.cell_measures)
                - div * (as.discr[node.id].bound_flux * phys.bc_values[node.id]);
        } else {
            as.rhs.segment(off, 1) = par.source;  // point source balance
        }

        const NeighborSplit ns = g.sorted_neighbors(node.id);
        for (int eid : ns.lower) {  // node is the higher neighbor
            const auto& e = g.edges[eid];
            const int eoff = as.dofs.offset(on_edge(eid), "flux");
            const SpMat div = divergence(grid);
            append_block(ts, SpMat(div * as.discr[node.id].bound_flux * e.mortar.to_primary_int),
                         off, eoff);
        }
        for (int eid : ns.higher) {  // node is the lower neighbor
            const auto& e = g.edges[eid];
            const int eoff = as.dofs.offset(on_edge(eid), "flux");
            append_block(ts, e.mortar.to_secondary_int, off, eoff, -1.0);
        }
    }

    for (const auto& e : g.edges) {
        const int eoff = as.dofs.offset(on_edge(e.id), "flux");
        const int hoff = as.dofs.offset(on_node(e.high), "pressure");
        const int loff = as.dofs.offset(on_node(e.low), "pressure");
        const EdgeFlowOperators ops =
            edge_flow_operators(g.nodes[e.high].grid, as.discr[e.high], e.mortar);
        const RobinBlocks b = assemble_robin_coupling(ops, phys.resistance[e.id],
                                                      phys.weight[e.id],
                                                      phys.bc_values[e.high]);
        append_block(ts, b.d_mortar, eoff, eoff);
        append_block(ts, b.to_high, eoff, hoff);
        append_block(ts, b.to_low, eoff, loff);
        as.rhs.segment(eoff, e.mortar.num_cells()) = b.rhs;
    }
    as.matrix = from_triplets(n, n, ts);
    return as;
}

}  // namespace

FlowResult run_flow(const MixedDimGraph& g, const FlowPhysics& phys, Scheme scheme)
{
    FlowAssembly as = assemble_flow(g, phys, scheme);
    const Vec x = linear_solve(as.matrix, as.rhs);

    FlowResult r;
    r.discr = std::move(as.discr);
    r.pressure.resize(g.num_nodes());
    r.mortar_flux.resize(g.num_edges());
    r.face_flux.resize(g.num_nodes());
    r.bound_data.resize(g.num_nodes());
    for (const auto& node : g.nodes) {
        const int off = as.dofs.offset(on_node(node.id), "pressure");
        r.pressure[node.id] = x.segment(off, node.grid.num_cells());
    }
    for (const auto& e : g.edges) {
        const int eoff = as.dofs.offset(on_edge(e.id), "flux");
        r.mortar_flux[e.id] = x.segment(eoff, e.mortar.num_cells());
    }
    for (const auto& node : g.nodes) {
        Vec data = phys.bc_values[node.id];
        const NeighborSplit ns = g.sorted_neighbors(node.id);
        for (int eid : ns.lower)
            data += g.edges[eid].mortar.to_primary_int * r.mortar_flux[eid];
        r.bound_data[node.id] = data;
        if (node.dim > 0)
            r.face_flux[node.id] = r.discr[node.id].flux * r.pressure[node.id]
                                 + r.discr[node.id].bound_flux * data;
        else
            r.face_flux[node.id] = Vec();
    }
    return r;
}

double conservation_violation(const MixedDimGraph& g, const FlowPhysics& phys,
                              const FlowResult& r)
{
    double worst = 0.0, scale = 0.0;
    for (const auto& node : g.nodes) {
        const Grid& grid = node.grid;
        Vec balance = Vec::Zero(grid.num_cells());
        if (node.dim > 0) {
            balance = divergence(grid) * r.face_flux[node.id];
            scale = std::max(scale, r.face_flux[node.id].lpNorm<Eigen::Infinity>());
        }
        balance -= phys.params[node.id].source.cwiseProduct(grid.cell_measures);
        const NeighborSplit ns = g.sorted_neighbors(node.id);
        for (int eid : ns.higher) {
            balance -= g.edges[eid].mortar.to_secondary_int * r.mortar_flux[eid];
            scale = std::max(scale, r.mortar_flux[eid].lpNorm<Eigen::Infinity>());
        }
        worst = std::max(worst, balance.lpNorm<Eigen::Infinity>());
    }
    return scale > 0 ? worst / scale : worst;
}

Vec sample_matrix_pressure(const MixedDimGraph& g, const FlowResult& r, const Vec2& a,
                           const Vec2& b, int n)
{
    const Grid& grid = g.nodes[g.matrix_node].grid;
    const Vec& p = r.pressure[g.matrix_node];
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 x = a + (b - a) * (static_cast<double>(i) + 0.5) / n;
        double best = std::numeric_limits<double>::max();
        int cell = 0;
        for (int c = 0; c < grid.num_cells(); ++c) {
            const double d = (grid.cell_centers.col(c) - x).squaredNorm();
            if (d < best) {
                best = d;
                cell = c;
            }
        }
        out(i) = p(cell);
    }
    return out;
}

}  // namespace dfm
