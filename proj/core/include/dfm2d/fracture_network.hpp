#pragma once

#include <string>
#include <vector>

#include "dfm2d/geom.hpp"

namespace dfm {

/// A 2d fracture network: line-segment fractures in a rectangular domain.
///
/// tol is the absolute snapping tolerance used when deciding whether two
/// geometric objects coincide. If not set explicitly it defaults to
/// 1e-8 times the domain diagonal.
struct FractureNetwork2 {
    std::vector<Segment> fractures;
    Rect domain;
    double tol = 0.0;

    FractureNetwork2() = default;
    FractureNetwork2(std::vector<Segment> fracs, Rect dom, double tolerance = 0.0);

    int num_fractures() const { return static_cast<int>(fractures.size()); }

    /// Plain-text reader. First non-comment line: `xmin ymin xmax ymax`,
    /// then one fracture per line: `x0 y0 x1 y1`. Lines starting with `#`
    /// are comments.
    static FractureNetwork2 from_file(const std::string& path);
    static FractureNetwork2 from_string(const std::string& text);
};

/// A fully processed network: fractures clipped to the domain, split at
/// mutual intersections, endpoints snapped and deduplicated.
struct ProcessedNetwork {
    struct SubSegment {
        int p0, p1;    // indices into points
        int fracture;  // provenance: original fracture index
    };
    struct PointInfo {
        bool on_boundary = false;           // lies on the domain rectangle
        std::vector<int> fractures;         // fractures incident to this point
        std::vector<int> interior_of;       // fractures for which the point is interior
        bool is_intersection() const { return fractures.size() >= 2; }
        /// Number of 1d branches fracture f contributes at this point.
        int branches_of(int f) const;
    };

    std::vector<Vec2> points;
    std::vector<SubSegment> segments;
    std::vector<PointInfo> point_info;
    int num_fractures = 0;
    Rect domain;
    double tol = 0.0;

    Segment segment_geometry(int s) const
    {
        return {points[segments[s].p0], points[segments[s].p1]};
    }
    /// Sub-segments of one fracture, ordered along the fracture.
    std::vector<int> fracture_segments(int f) const;
    /// Indices of intersection points (candidate 0d subdomains).
    std::vector<int> intersection_points() const;
};

/// Compute all pairwise intersections, snap points within tol, and split
/// fractures into non-crossing sub-segments. Collinear overlapping fractures
/// are rejected with a GeometryError.
ProcessedNetwork process_network(const FractureNetwork2& net);

}  // namespace dfm
