#include "dfm2d/tpfa.hpp"

namespace dfm {

Eigen::Matrix2Xd half_transmissibilities(const Grid& g, const TensorField& perm)
{
    const int nf = g.num_faces();
    Eigen::Matrix2Xd t = Eigen::Matrix2Xd::Zero(2, nf);
    for (int f = 0; f < nf; ++f) {
        for (int slot = 0; slot < 2; ++slot) {
            const int c = g.face_cells[f][slot];
            if (c < 0) continue;
            const Vec2 d = g.face_centers.col(f) - g.cell_centers.col(c);
            const Vec2 n = (slot == 0 ? 1.0 : -1.0) * g.face_normals.col(f);  // outward of c
            const double th =
                g.face_measures(f) * n.dot(perm.tensor(c) * d) / d.squaredNorm();
            if (!(th > 0))
                throw Error("tpfa: non-positive half transmissibility at face "
                            + std::to_string(f));
            t(slot, f) = th;
        }
    }
    return t;
}

FluxDiscretization tpfa(const Grid& g, const FlowParameters& p, const ScalarBC& bc)
{
    bc.validate(g);
    const Eigen::Matrix2Xd th = half_transmissibilities(g, p.permeability);
    const int nf = g.num_faces();

    std::vector<Triplet> flux, bflux, tc, tb;
    for (int f = 0; f < nf; ++f) {
        const int c0 = g.face_cells[f][0], c1 = g.face_cells[f][1];
        if (c0 >= 0 && c1 >= 0) {
            const double t0 = th(0, f) / p.viscosity(c0);
            const double t1 = th(1, f) / p.viscosity(c1);
            const double t = t0 * t1 / (t0 + t1);
            // Flux along the stored normal: positive from c0 to c1.
            flux.emplace_back(f, c0, t);
            flux.emplace_back(f, c1, -t);
            // Trace from the c0-side balance: pi = p0 - t (p0 - p1) / t0.
            tc.emplace_back(f, c0, 1.0 - t / t0);
            tc.emplace_back(f, c1, t / t0);
        } else {
            const int c = g.boundary_cell(f);
            const int s = g.face_sign(f, c);
            const double t = th(c0 >= 0 ? 0 : 1, f) / p.viscosity(c);
            if (bc.is_dir(f)) {
                flux.emplace_back(f, c, s * t);
                bflux.emplace_back(f, f, -s * t);
                tb.emplace_back(f, f, 1.0);
            } else {
                // Outward flux g given; trace from the one-sided balance.
                bflux.emplace_back(f, f, static_cast<double>(s));
                tc.emplace_back(f, c, 1.0);
                tb.emplace_back(f, f, -1.0 / t);
            }
        }
    }
    FluxDiscretization d;
    const int nc = g.num_cells();
    d.flux = from_triplets(nf, nc, flux);
    d.bound_flux = from_triplets(nf, nf, bflux);
    d.trace_cell = from_triplets(nf, nc, tc);
    d.trace_bound = from_triplets(nf, nf, tb);
    return d;
}

UpwindDiscretization upwind(const Grid& g, const Vec& face_flux, const ScalarBC& bc)
{
    bc.validate(g);
    const int nf = g.num_faces();
    std::vector<Triplet> adv, badv;
    for (int f = 0; f < nf; ++f) {
        const double q = face_flux(f);
        const int c0 = g.face_cells[f][0], c1 = g.face_cells[f][1];
        if (c0 >= 0 && c1 >= 0) {
            // Upstream cell: q >= 0 flows from c0 to c1.
            adv.emplace_back(f, q >= 0 ? c0 : c1, q);
        } else {
            const int c = g.boundary_cell(f);
            const int s = g.face_sign(f, c);
            const double q_out = s * q;  // outward flux for this cell
            if (q_out >= 0)
                adv.emplace_back(f, c, q);  // outflow: upstream is the cell
            else
                badv.emplace_back(f, f, q);  // inflow: concentration from bc data
        }
    }
    UpwindDiscretization u;
    u.adv = from_triplets(nf, g.num_cells(), adv);
    u.bound_adv = from_triplets(nf, nf, badv);
    return u;
}

SpMat mass_matrix(const Grid& g, const Vec& coeff)
{
    return diag(coeff.cwiseProduct(g.cell_measures));
}

}  // namespace dfm
