#include "dfm2d/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "dfm2d/errors.hpp"

namespace dfm {

void MeshSizeParams::validate() const
{
    if (!(h_min > 0.0 && h_min <= h_frac && h_min <= h_bound))
        throw MeshError("mesh sizes must satisfy 0 < h_min <= h_frac and h_min <= h_bound");
}

namespace {

struct Tri {
    int v[3];    // CCW vertices
    int nbr[3];  // neighbor across edge k = (v[k], v[(k+1)%3]), -1 on hull
    bool alive = true;
};

inline std::int64_t edge_key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

class Delaunay {
public:
    explicit Delaunay(const Rect& box)
    {
        const double cx = 0.5 * (box.xmin + box.xmax), cy = 0.5 * (box.ymin + box.ymax);
        const double r = 10.0 * box.diagonal() + 1.0;
        add_vertex(Vec2(cx - 2 * r, cy - r));
        add_vertex(Vec2(cx + 2 * r, cy - r));
        add_vertex(Vec2(cx, cy + 2 * r));
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
        v2t_ = {0, 0, 0};
    }

    int insert(const Vec2& p)
    {
        const int t0 = locate(p);
        const int vp = add_vertex(p);

        // Cavity: triangles whose circumcircle contains p. Membership is
        // tracked with a timestamp array to avoid per-insert allocations.
        ++stamp_;
        if (mark_.size() < tris_.size() + 8) mark_.resize(2 * tris_.size() + 64, 0);
        auto in_cav = [&](int t) { return mark_[t] == stamp_; };
        std::vector<int> cavity;
        std::vector<int> stack{t0};
        mark_[t0] = stamp_;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                const int n = tris_[t].nbr[k];
                if (n >= 0 && !in_cav(n) && in_circumcircle(n, p)) {
                    mark_[n] = stamp_;
                    stack.push_back(n);
                }
            }
        }

        struct BEdge {
            int a, b, outside;
        };
        std::vector<BEdge> boundary;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                const int n = tris_[t].nbr[k];
                if (n < 0 || !in_cav(n))
                    boundary.push_back({tris_[t].v[k], tris_[t].v[(k + 1) % 3], n});
            }
        }
        for (int t : cavity) tris_[t].alive = false;

        // Star-connect p to the cavity boundary.
        std::unordered_map<int, int> out_by_first, in_by_second;
        std::vector<int> created;
        for (const auto& e : boundary) {
            const int nt = static_cast<int>(tris_.size());
            tris_.push_back({{vp, e.a, e.b}, {-1, e.outside, -1}, true});
            if (e.outside >= 0) {
                Tri& o = tris_[e.outside];
                for (int k = 0; k < 3; ++k)
                    if (o.v[k] == e.b && o.v[(k + 1) % 3] == e.a) o.nbr[k] = nt;
            }
            out_by_first[e.a] = nt;
            in_by_second[e.b] = nt;
            created.push_back(nt);
            v2t_resize();
            v2t_[vp] = nt;
            v2t_[e.a] = nt;
            v2t_[e.b] = nt;
        }
        for (int nt : created) {
            Tri& t = tris_[nt];
            t.nbr[0] = in_by_second.at(t.v[1]);  // edge (p,a) pairs with edge (b',p), b' = a
            t.nbr[2] = out_by_first.at(t.v[2]);  // edge (b,p) pairs with edge (p,a'), a' = b
        }
        return vp;
    }

    /// Force segment (va, vb) to be an edge by flipping crossing edges.
    bool ensure_edge(int va, int vb, const std::unordered_set<std::int64_t>& constrained)
    {
        if (edge_exists(va, vb)) return true;
        std::deque<std::pair<int, int>> crossing = collect_crossings(va, vb);
        std::size_t guard = 0;
        const std::size_t max_iter =
            200 * (crossing.size() + 4) * (crossing.size() + 4) + 10000;
        while (!crossing.empty()) {
            if (++guard > max_iter) return false;
            auto [u, v] = crossing.front();
            crossing.pop_front();
            if (constrained.count(edge_key(u, v)))
                throw MeshError("edge recovery hit a constrained edge: constraints cross");
            int t, k;
            if (!locate_edge(u, v, t, k)) continue;  // edge already flipped away
            if (!flippable(t, k)) {
                crossing.emplace_back(u, v);
                continue;
            }
            const auto [c, d] = flip(t, k);
            if (c != va && c != vb && d != va && d != vb && crosses(va, vb, c, d))
                crossing.emplace_back(c, d);
        }
        return edge_exists(va, vb);
    }

    /// Lawson flips restoring the Delaunay property away from constraints.
    void legalize(const std::unordered_set<std::int64_t>& constrained)
    {
        std::deque<std::pair<int, int>> queue;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!tris_[t].alive) continue;
            for (int k = 0; k < 3; ++k)
                if (tris_[t].nbr[k] > static_cast<int>(t))
                    queue.emplace_back(tris_[t].v[k], tris_[t].v[(k + 1) % 3]);
        }
        std::size_t guard = 0;
        const std::size_t cap = 80 * queue.size() + 1000;
        while (!queue.empty() && ++guard < cap) {
            auto [u, v] = queue.front();
            queue.pop_front();
            if (constrained.count(edge_key(u, v))) continue;
            int t, k;
            if (!locate_edge(u, v, t, k)) continue;
            const int n = tris_[t].nbr[k];
            if (n < 0) continue;
            const int d = opposite_vertex(n, u, v);
            if (!in_circumcircle(t, pts_[d]) || !flippable(t, k)) continue;
            const auto [c2, d2] = flip(t, k);
            for (int vv : {c2, d2})
                for (int uu : {u, v}) queue.emplace_back(uu, vv);
        }
    }

    bool edge_exists(int u, int v)
    {
        int t, k;
        return locate_edge(u, v, t, k);
    }

    const std::vector<Vec2>& points() const { return pts_; }

    /// Alive triangles not touching the three super vertices.
    std::vector<std::array<int, 3>> triangles() const
    {
        std::vector<std::array<int, 3>> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
            out.push_back({t.v[0], t.v[1], t.v[2]});
        }
        return out;
    }

private:
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> v2t_;
    std::vector<int> mark_;
    int stamp_ = 0;
    int last_located_ = 0;

    int add_vertex(const Vec2& p)
    {
        pts_.push_back(p);
        return static_cast<int>(pts_.size()) - 1;
    }
    void v2t_resize()
    {
        if (v2t_.size() < pts_.size()) v2t_.resize(pts_.size(), 0);
    }

    static double orient(const Vec2& a, const Vec2& b, const Vec2& c)
    {
        return cross2(b - a, c - a);
    }
    static double orient_eps(const Vec2& a, const Vec2& b, const Vec2& c)
    {
        const double l = std::max((b - a).squaredNorm(), (c - a).squaredNorm());
        return 1e-13 * l;
    }

    bool in_circumcircle(int t, const Vec2& p) const
    {
        const Vec2 a = pts_[tris_[t].v[0]], b = pts_[tris_[t].v[1]], c = pts_[tris_[t].v[2]];
        const Vec2 ad = a - p, bd = b - p, cd = c - p;
        const double det = ad.squaredNorm() * cross2(bd, cd) - bd.squaredNorm() * cross2(ad, cd)
                         + cd.squaredNorm() * cross2(ad, bd);
        const double l2 = std::max({ad.squaredNorm(), bd.squaredNorm(), cd.squaredNorm()});
        return det > 1e-12 * l2 * l2;  // ties count as outside
    }

    int locate(const Vec2& p)
    {
        int t = last_located_;
        if (t >= static_cast<int>(tris_.size()) || !tris_[t].alive) t = first_alive();
        std::size_t guard = 0;
        const std::size_t cap = 4 * tris_.size() + 64;
        while (true) {
            if (++guard > cap) {
                for (std::size_t i = 0; i < tris_.size(); ++i)
                    if (tris_[i].alive && contains(static_cast<int>(i), p))
                        return last_located_ = static_cast<int>(i);
                throw MeshError("point location failed");
            }
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = pts_[tris_[t].v[k]], b = pts_[tris_[t].v[(k + 1) % 3]];
                if (orient(a, b, p) < -orient_eps(a, b, p)) {
                    next = tris_[t].nbr[k];
                    break;
                }
            }
            if (next < 0) return last_located_ = t;
            t = next;
        }
    }

    bool contains(int t, const Vec2& p) const
    {
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = pts_[tris_[t].v[k]], b = pts_[tris_[t].v[(k + 1) % 3]];
            if (orient(a, b, p) < -orient_eps(a, b, p)) return false;
        }
        return true;
    }

    int first_alive() const
    {
        for (std::size_t i = tris_.size(); i-- > 0;)
            if (tris_[i].alive) return static_cast<int>(i);
        throw MeshError("empty triangulation");
    }

    /// Find a triangle having edge (u, v) in either direction.
    bool locate_edge(int u, int v, int& t_out, int& k_out)
    {
        for (int t : fan_triangles(u)) {
            for (int k = 0; k < 3; ++k) {
                const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
                if ((a == u && b == v) || (a == v && b == u)) {
                    t_out = t;
                    k_out = k;
                    return true;
                }
            }
        }
        return false;
    }

    int fan_start(int u)
    {
        v2t_resize();
        int t = v2t_[u];
        auto has_u = [&](int i) {
            return tris_[i].alive
                && (tris_[i].v[0] == u || tris_[i].v[1] == u || tris_[i].v[2] == u);
        };
        if (t >= 0 && t < static_cast<int>(tris_.size()) && has_u(t)) return t;
        for (std::size_t i = tris_.size(); i-- > 0;)
            if (has_u(static_cast<int>(i))) return v2t_[u] = static_cast<int>(i);
        return -1;
    }

    /// All alive triangles incident to u (connected fan around u).
    std::vector<int> fan_triangles(int u)
    {
        std::vector<int> out;
        const int start = fan_start(u);
        if (start < 0) return out;
        std::unordered_set<int> seen;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            if (t < 0 || seen.count(t) || !tris_[t].alive) continue;
            bool has = false;
            for (int k = 0; k < 3; ++k)
                if (tris_[t].v[k] == u) has = true;
            if (!has) continue;
            seen.insert(t);
            out.push_back(t);
            for (int k = 0; k < 3; ++k) stack.push_back(tris_[t].nbr[k]);
        }
        return out;
    }

    int opposite_vertex(int t, int u, int v) const
    {
        for (int k = 0; k < 3; ++k)
            if (tris_[t].v[k] != u && tris_[t].v[k] != v) return tris_[t].v[k];
        throw MeshError("degenerate triangle");
    }

    int neighbor_across(int t, int u, int v) const
    {
        for (int k = 0; k < 3; ++k) {
            const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
            if ((a == u && b == v) || (a == v && b == u)) return tris_[t].nbr[k];
        }
        throw MeshError("neighbor_across: edge not in triangle");
    }

    bool flippable(int t, int k) const
    {
        const int n = tris_[t].nbr[k];
        if (n < 0) return false;
        const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3], c = tris_[t].v[(k + 2) % 3];
        const int d = opposite_vertex(n, a, b);
        const Vec2 pa = pts_[a], pb = pts_[b], pc = pts_[c], pd = pts_[d];
        return orient(pa, pd, pc) > orient_eps(pa, pd, pc)
            && orient(pd, pb, pc) > orient_eps(pd, pb, pc);
    }

    /// Flip edge k of triangle t; returns the new diagonal (c, d).
    std::pair<int, int> flip(int t, int k)
    {
        const int n = tris_[t].nbr[k];
        const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3], c = tris_[t].v[(k + 2) % 3];
        const int d = opposite_vertex(n, a, b);

        auto nbr_of = [&](int tt, int u, int v) {
            for (int kk = 0; kk < 3; ++kk)
                if (tris_[tt].v[kk] == u && tris_[tt].v[(kk + 1) % 3] == v)
                    return tris_[tt].nbr[kk];
            throw MeshError("flip: adjacency corrupted");
        };
        const int X1 = nbr_of(t, b, c), X2 = nbr_of(t, c, a);
        const int Y1 = nbr_of(n, a, d), Y2 = nbr_of(n, d, b);

        tris_[t] = {{a, d, c}, {Y1, n, X2}, true};
        tris_[n] = {{d, b, c}, {Y2, X1, t}, true};
        repoint(X1, c, b, n);
        repoint(Y1, d, a, t);
        v2t_resize();
        v2t_[a] = t;
        v2t_[b] = n;
        v2t_[c] = t;
        v2t_[d] = t;
        return {c, d};
    }

    /// Redirect outer triangle's nbr slot for directed edge (u, v) to newt.
    void repoint(int outer, int u, int v, int newt)
    {
        if (outer < 0) return;
        for (int kk = 0; kk < 3; ++kk)
            if (tris_[outer].v[kk] == u && tris_[outer].v[(kk + 1) % 3] == v)
                tris_[outer].nbr[kk] = newt;
    }

    bool crosses(int a, int b, int u, int v) const
    {
        const Vec2 pa = pts_[a], pb = pts_[b], pu = pts_[u], pv = pts_[v];
        const double o1 = orient(pa, pb, pu), o2 = orient(pa, pb, pv);
        const double o3 = orient(pu, pv, pa), o4 = orient(pu, pv, pb);
        const double e1 = orient_eps(pa, pb, pu), e2 = orient_eps(pu, pv, pa);
        return ((o1 > e1 && o2 < -e1) || (o1 < -e1 && o2 > e1))
            && ((o3 > e2 && o4 < -e2) || (o3 < -e2 && o4 > e2));
    }

    /// Edges properly crossed by segment (va, vb), by marching va -> vb.
    /// Invariant: u is on the positive side of the line va->vb, v on the
    /// negative side.
    std::deque<std::pair<int, int>> collect_crossings(int va, int vb)
    {
        const Vec2 pa = pts_[va], pb = pts_[vb];
        int cur = -1, u = -1, v = -1;
        for (int t : fan_triangles(va)) {
            int iu = -1;
            for (int k = 0; k < 3; ++k)
                if (tris_[t].v[k] == va) iu = k;
            const int x = tris_[t].v[(iu + 1) % 3], y = tris_[t].v[(iu + 2) % 3];
            if (crosses(va, vb, x, y)) {
                const bool x_pos = orient(pa, pb, pts_[x]) > 0;
                u = x_pos ? x : y;
                v = x_pos ? y : x;
                cur = neighbor_across(t, x, y);
                break;
            }
        }
        if (cur < 0) throw MeshError("edge recovery: no crossing cone found");

        std::deque<std::pair<int, int>> out;
        out.emplace_back(u, v);
        std::size_t guard = 0;
        while (++guard < tris_.size() + 8) {
            const int z = opposite_vertex(cur, u, v);
            if (z == vb) return out;
            if (orient(pa, pb, pts_[z]) > 0)
                u = z;
            else
                v = z;
            out.emplace_back(u, v);
            cur = neighbor_across(cur, u, v);
            if (cur < 0) throw MeshError("edge recovery: march left the hull");
        }
        throw MeshError("edge recovery: march did not terminate");
    }
};

double distance_to_network(const ProcessedNetwork& pnet, const Vec2& p)
{
    double d = std::numeric_limits<double>::max();
    for (std::size_t s = 0; s < pnet.segments.size(); ++s)
        d = std::min(d, point_segment_distance(p, pnet.segment_geometry(static_cast<int>(s))));
    return d;
}

}  // namespace

Grid triangulate(const ProcessedNetwork& pnet, const MeshSizeParams& params, std::uint64_t seed)
{
    params.validate();
    const Rect dom = pnet.domain;

    for (std::size_t s = 0; s < pnet.segments.size(); ++s) {
        if (pnet.segment_geometry(static_cast<int>(s)).length() < params.h_min)
            throw MeshError("fracture " + std::to_string(pnet.segments[s].fracture)
                            + ": sub-segment shorter than h_min");
    }

    Delaunay dt(dom);

    // Domain corners and network points; both are mandatory vertices.
    const Vec2 corners[4] = {{dom.xmin, dom.ymin}, {dom.xmax, dom.ymin},
                             {dom.xmax, dom.ymax}, {dom.xmin, dom.ymax}};
    for (const Vec2& c : corners) dt.insert(c);

    std::vector<int> pnet_vertex(pnet.points.size(), -1);
    for (std::size_t k = 0; k < pnet.points.size(); ++k)
        pnet_vertex[k] = dt.insert(pnet.points[k]);

    // Fracture chains seeded at spacing <= h_frac.
    struct Chain {
        std::vector<int> verts;
        int fracture;
    };
    std::vector<Chain> chains;
    for (const auto& seg : pnet.segments) {
        const Segment s{pnet.points[seg.p0], pnet.points[seg.p1]};
        const int nsub = std::max(1, static_cast<int>(std::round(s.length() / params.h_frac)));
        Chain ch;
        ch.fracture = seg.fracture;
        ch.verts.push_back(pnet_vertex[seg.p0]);
        for (int i = 1; i < nsub; ++i)
            ch.verts.push_back(dt.insert(s.point_at(static_cast<double>(i) / nsub)));
        ch.verts.push_back(pnet_vertex[seg.p1]);
        chains.push_back(std::move(ch));
    }

    // Boundary stations: per side, mandatory stations are the corners and any
    // on-boundary network points; gaps are filled at spacing <= h_bound.
    for (int side = 0; side < 4; ++side) {
        const Segment sd{corners[side], corners[(side + 1) % 4]};
        std::vector<double> ts{0.0, 1.0};
        for (std::size_t k = 0; k < pnet.points.size(); ++k) {
            if (!pnet.point_info[k].on_boundary) continue;
            if (point_segment_distance(pnet.points[k], sd) <= pnet.tol) {
                const double t = project_param(sd, pnet.points[k]);
                if (t > 1e-12 && t < 1.0 - 1e-12) ts.push_back(t);
            }
        }
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            const double gap = (ts[i + 1] - ts[i]) * sd.length();
            const int nsub = std::max(1, static_cast<int>(std::round(gap / params.h_bound)));
            for (int j = 1; j < nsub; ++j)
                dt.insert(sd.point_at(ts[i] + (ts[i + 1] - ts[i]) * j / nsub));
        }
    }

    // Graded interior lattice with deterministic jitter.
    std::mt19937_64 rng(seed * 6364136223846793005ULL + 1442695040888963407ULL);
    std::uniform_real_distribution<double> jit(-0.18, 0.18);
    const bool has_fractures = !pnet.segments.empty();
    const int nx0 = std::max(1, static_cast<int>(std::ceil(dom.width() / params.h_bound)));
    const int ny0 = std::max(1, static_cast<int>(std::ceil(dom.height() / params.h_bound)));

    struct QCell {
        Vec2 center;
        double size;
    };
    std::vector<QCell> work;
    for (int j = 0; j < ny0; ++j)
        for (int i = 0; i < nx0; ++i)
            work.push_back({Vec2(dom.xmin + dom.width() * (i + 0.5) / nx0,
                                 dom.ymin + dom.height() * (j + 0.5) / ny0),
                            std::max(dom.width() / nx0, dom.height() / ny0)});

    while (!work.empty()) {
        const QCell c = work.back();
        work.pop_back();
        double target = params.h_bound;
        if (has_fractures) {
            const double d = distance_to_network(pnet, c.center);
            target = std::clamp(params.h_frac + 0.8 * d, params.h_frac, params.h_bound);
        }
        if (c.size > 1.42 * target) {
            const double s = 0.5 * c.size;
            for (int q = 0; q < 4; ++q)
                work.push_back(
                    {c.center + Vec2(((q & 1) ? 0.5 : -0.5) * s, ((q & 2) ? 0.5 : -0.5) * s), s});
            continue;
        }
        const Vec2 p = c.center + Vec2(jit(rng) * c.size, jit(rng) * c.size);
        const double clearance = 0.62 * c.size;
        if (dom.boundary_distance(p) < clearance || !dom.contains(p)) continue;
        if (has_fractures && distance_to_network(pnet, p) < clearance) continue;
        dt.insert(p);
    }

    // Recover and tag constrained edges, then restore Delaunay elsewhere.
    std::unordered_set<std::int64_t> constrained;
    std::map<std::pair<int, int>, int> edge_to_frac;
    for (const Chain& ch : chains) {
        for (std::size_t i = 0; i + 1 < ch.verts.size(); ++i) {
            const int a = ch.verts[i], b = ch.verts[i + 1];
            if (!dt.ensure_edge(a, b, constrained))
                throw MeshError("failed to recover fracture edge (fracture "
                                + std::to_string(ch.fracture) + ")");
            constrained.insert(edge_key(a, b));
            edge_to_frac[std::minmax(a, b)] = ch.fracture;
        }
    }
    dt.legalize(constrained);
    for (const Chain& ch : chains)
        for (std::size_t i = 0; i + 1 < ch.verts.size(); ++i)
            if (!dt.ensure_edge(ch.verts[i], ch.verts[i + 1], constrained))
                throw MeshError("fracture edge lost after legalization (fracture "
                                + std::to_string(ch.fracture) + ")");

    // Compact vertices and build the grid.
    const auto raw_tris = dt.triangles();
    const auto& raw_pts = dt.points();
    std::vector<int> remap(raw_pts.size(), -1);
    int nn = 0;
    for (const auto& t : raw_tris)
        for (int v : t)
            if (remap[v] < 0) remap[v] = nn++;
    Eigen::Matrix2Xd nodes(2, nn);
    for (std::size_t v = 0; v < raw_pts.size(); ++v)
        if (remap[v] >= 0) nodes.col(remap[v]) = raw_pts[v];

    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 3>> tags;
    for (const auto& t : raw_tris) {
        std::array<int, 3> tv{remap[t[0]], remap[t[1]], remap[t[2]]};
        std::array<int, 3> tg{-1, -1, -1};
        for (int k = 0; k < 3; ++k) {
            auto it = edge_to_frac.find(std::minmax(t[k], t[(k + 1) % 3]));
            if (it != edge_to_frac.end()) tg[k] = it->second;
        }
        tris.push_back(tv);
        tags.push_back(tg);
    }
    Grid g = make_triangle_grid(nodes, tris, tags);
    g.name = "matrix";
    return g;
}

}  // namespace dfm
