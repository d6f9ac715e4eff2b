#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

namespace dfm {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangle, used as the simulation domain boundary.
struct Rect {
    double xmin = 0, ymin = 0, xmax = 1, ymax = 1;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diagonal() const { return std::hypot(width(), height()); }

    bool contains(const Vec2& p, double tol = 0.0) const
    {
        return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol
            && p.y() <= ymax + tol;
    }

    /// Distance from p to the rectangle outline (0 if p is on a side).
    double boundary_distance(const Vec2& p) const
    {
        double dx = std::min(std::abs(p.x() - xmin), std::abs(p.x() - xmax));
        double dy = std::min(std::abs(p.y() - ymin), std::abs(p.y() - ymax));
        return std::min(dx, dy);
    }
};

/// Line segment between two points.
struct Segment {
    Vec2 a, b;

    Vec2 dir() const { return b - a; }
    double length() const { return (b - a).norm(); }
    Vec2 point_at(double t) const { return a + t * (b - a); }
    Vec2 midpoint() const { return 0.5 * (a + b); }
    Vec2 unit_tangent() const { return dir() / length(); }
    /// Unit normal, tangent rotated +90 degrees.
    Vec2 unit_normal() const
    {
        Vec2 t = unit_tangent();
        return Vec2(-t.y(), t.x());
    }
};

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Parameter t in [0,1] of the point on s closest to p.
inline double project_param(const Segment& s, const Vec2& p)
{
    Vec2 d = s.dir();
    double den = d.squaredNorm();
    if (den == 0.0) return 0.0;
    return std::clamp((p - s.a).dot(d) / den, 0.0, 1.0);
}

inline double point_segment_distance(const Vec2& p, const Segment& s)
{
    return (p - s.point_at(project_param(s, p))).norm();
}

/// Proper intersection of two segments (interior-interior crossing included,
/// near-parallel pairs rejected). Returns the intersection point if the
/// infinite lines cross within both parameter ranges, extended by tol.
std::optional<Vec2> segment_intersection(const Segment& s1, const Segment& s2, double tol);

/// True if the two segments are collinear (within tol) and share an overlap
/// of positive length (> tol).
bool collinear_overlap(const Segment& s1, const Segment& s2, double tol);

/// Clip a segment to a rectangle (Liang-Barsky). Returns nothing if the
/// segment lies entirely outside.
std::optional<Segment> clip_to_rect(const Segment& s, const Rect& r);

}  // namespace dfm
