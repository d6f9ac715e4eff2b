#include "dfm2d/coupling.hpp"

#include "dfm2d/errors.hpp"

namespace dfm {

EdgeFlowOperators edge_flow_operators(const Grid& g_high, const FluxDiscretization& d_high,
                                      const MortarGrid& m)
{
    EdgeFlowOperators ops;
    ops.trace_p = m.primary_avg * d_high.trace_cell;
    ops.trace_bc = m.primary_avg * d_high.trace_bound;
    ops.trace_own = SpMat(ops.trace_bc * m.to_primary_int);
    ops.lower_p = m.secondary_avg;
    ops.into_lower = m.to_secondary_int;
    ops.into_higher = m.to_primary_int;

    // Wall-adjacent cell selector in mortar indexing.
    std::vector<Triplet> ts;
    for (int k = 0; k < m.primary_avg.outerSize(); ++k) {
        for (SpMat::InnerIterator it(m.primary_avg, k); it; ++it) {
            const int f = static_cast<int>(it.col());
            const int c = g_high.boundary_cell(f);
            if (c < 0) throw GeometryError("edge operators: interface face is not one-sided");
            ts.emplace_back(static_cast<int>(it.row()), c, it.value());
        }
    }
    ops.adjacent_cell = from_triplets(m.num_cells(), g_high.num_cells(), ts);
    return ops;
}

RobinBlocks assemble_robin_coupling(const EdgeFlowOperators& ops, const Vec& resistance,
                                    const Vec& weight, const Vec& g_bc_high)
{
    if ((resistance.array() < 0).any())
        throw Error("robin coupling: negative interface resistance");
    const SpMat w = diag(weight);
    RobinBlocks b;
    b.d_mortar = SpMat(diag(resistance) - w * ops.trace_own);
    b.to_high = SpMat(-(w * ops.trace_p));
    b.to_low = SpMat(w * ops.lower_p);
    b.rhs = w * (ops.trace_bc * g_bc_high);
    return b;
}

}  // namespace dfm
