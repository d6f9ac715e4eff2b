#pragma once

#include "dfm2d/mdgraph.hpp"
#include "dfm2d/tpfa.hpp"

namespace dfm {

/// Pre-composed projection/trace operators of one interface for scalar
/// interface laws. The higher-side trace is restricted to the edge's own
/// mortar data: an interface law may depend on its own mortar unknowns and
/// the two neighbor subdomains only, so contributions of other interfaces to
/// the trace stencil are dropped from the interface row (they stay in the
/// subdomain mass balances, which keep full boundary data).
struct EdgeFlowOperators {
    SpMat trace_p;        // nm x nc_high: mortar-projected pressure trace, cell part
    SpMat trace_own;      // nm x nm: trace sensitivity to this edge's mortar flux
    SpMat trace_bc;       // nm x nf_high: trace sensitivity to boundary data
    SpMat lower_p;        // nm x nc_low: projected lower pressure
    SpMat into_lower;     // nc_low x nm: extensive source scatter
    SpMat into_higher;    // nf_high x nm: extensive Neumann data scatter
    SpMat adjacent_cell;  // nm x nc_high: wall-adjacent cell value (simple trace)
};

EdgeFlowOperators edge_flow_operators(const Grid& g_high, const FluxDiscretization& d_high,
                                      const MortarGrid& m);

/// Robin-type interface law, the normal Darcy relation: per mortar cell
///   resistance * lambda + weight * (Pi p_low - Pi tr p_high) = 0,
/// with lambda the extensive mortar flux (positive from high to low).
/// Emits the three matrix blocks and the boundary-data right-hand side.
struct RobinBlocks {
    SpMat d_mortar;  // nm x nm
    SpMat to_high;   // nm x nc_high
    SpMat to_low;    // nm x nc_low
    Vec rhs;         // nm, from external boundary data of the higher grid
};

RobinBlocks assemble_robin_coupling(const EdgeFlowOperators& ops, const Vec& resistance,
                                    const Vec& weight, const Vec& g_bc_high);

}  // namespace dfm
