#include "dfm2d/geom.hpp"

namespace dfm {

std::optional<Vec2> segment_intersection(const Segment& s1, const Segment& s2, double tol)
{
    const Vec2 d1 = s1.dir();
    const Vec2 d2 = s2.dir();
    const double den = cross2(d1, d2);
    const double scale = d1.norm() * d2.norm();
    if (std::abs(den) <= 1e-12 * scale) return std::nullopt;  // parallel or degenerate

    const Vec2 w = s2.a - s1.a;
    const double t = cross2(w, d2) / den;
    const double u = cross2(w, d1) / den;

    const double tol1 = tol / std::max(d1.norm(), 1e-300);
    const double tol2 = tol / std::max(d2.norm(), 1e-300);
    if (t < -tol1 || t > 1.0 + tol1 || u < -tol2 || u > 1.0 + tol2) return std::nullopt;
    return s1.point_at(std::clamp(t, 0.0, 1.0));
}

bool collinear_overlap(const Segment& s1, const Segment& s2, double tol)
{
    // Both endpoints of s2 within tol of the line through s1, and parameter
    // ranges overlapping by more than tol.
    const Vec2 d1 = s1.dir();
    const double len1 = d1.norm();
    if (len1 == 0.0) return false;
    const Vec2 n(-d1.y() / len1, d1.x() / len1);
    if (std::abs(n.dot(s2.a - s1.a)) > tol || std::abs(n.dot(s2.b - s1.a)) > tol) return false;

    const Vec2 t = d1 / len1;
    double u0 = t.dot(s2.a - s1.a);
    double u1 = t.dot(s2.b - s1.a);
    if (u0 > u1) std::swap(u0, u1);
    const double lo = std::max(0.0, u0);
    const double hi = std::min(len1, u1);
    return hi - lo > tol;
}

std::optional<Segment> clip_to_rect(const Segment& s, const Rect& r)
{
    // Liang-Barsky parametric clipping.
    const Vec2 d = s.dir();
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
    const double q[4] = {s.a.x() - r.xmin, r.xmax - s.a.x(), s.a.y() - r.ymin, r.ymax - s.a.y()};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return std::nullopt;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            if (t > t1) return std::nullopt;
            t0 = std::max(t0, t);
        } else {
            if (t < t0) return std::nullopt;
            t1 = std::min(t1, t);
        }
    }
    Segment out{s.point_at(t0), s.point_at(t1)};
    // Snap clipped endpoints exactly onto the rectangle sides they hit.
    auto snap = [&](Vec2& v) {
        if (std::abs(v.x() - r.xmin) < 1e-14 * r.width()) v.x() = r.xmin;
        if (std::abs(v.x() - r.xmax) < 1e-14 * r.width()) v.x() = r.xmax;
        if (std::abs(v.y() - r.ymin) < 1e-14 * r.height()) v.y() = r.ymin;
        if (std::abs(v.y() - r.ymax) < 1e-14 * r.height()) v.y() = r.ymax;
    };
    snap(out.a);
    snap(out.b);
    return out;
}

}  // namespace dfm
