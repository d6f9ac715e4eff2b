#include "dfm2d/fracture_network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "dfm2d/errors.hpp"

namespace dfm {

FractureNetwork2::FractureNetwork2(std::vector<Segment> fracs, Rect dom, double tolerance)
    : fractures(std::move(fracs)), domain(dom), tol(tolerance)
{
    if (tol <= 0.0) tol = 1e-8 * domain.diagonal();
    for (std::size_t i = 0; i < fractures.size(); ++i) {
        if (fractures[i].length() <= tol)
            throw GeometryError("fracture " + std::to_string(i) + " has length <= tol");
    }
}

FractureNetwork2 FractureNetwork2::from_string(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (vals.size() != 4)
            throw ConfigError("network file line " + std::to_string(lineno)
                              + ": expected 4 numbers, got " + std::to_string(vals.size()));
        rows.push_back(vals);
    }
    if (rows.empty()) throw ConfigError("network file: missing domain header line");
    Rect dom{rows[0][0], rows[0][1], rows[0][2], rows[0][3]};
    if (dom.width() <= 0 || dom.height() <= 0)
        throw ConfigError("network file: degenerate domain rectangle");
    std::vector<Segment> fracs;
    for (std::size_t i = 1; i < rows.size(); ++i)
        fracs.push_back({Vec2(rows[i][0], rows[i][1]), Vec2(rows[i][2], rows[i][3])});
    return FractureNetwork2(std::move(fracs), dom);
}

FractureNetwork2 FractureNetwork2::from_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open network file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_string(ss.str());
}

int ProcessedNetwork::PointInfo::branches_of(int f) const
{
    for (std::size_t i = 0; i < fractures.size(); ++i) {
        if (fractures[i] != f) continue;
        for (int g : interior_of)
            if (g == f) return 2;
        return 1;
    }
    return 0;
}

std::vector<int> ProcessedNetwork::fracture_segments(int f) const
{
    std::vector<int> out;
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (segments[s].fracture == f) out.push_back(static_cast<int>(s));
    return out;
}

std::vector<int> ProcessedNetwork::intersection_points() const
{
    std::vector<int> out;
    for (std::size_t p = 0; p < point_info.size(); ++p)
        if (point_info[p].is_intersection()) out.push_back(static_cast<int>(p));
    return out;
}

namespace {

// Candidate point with a merge priority: points produced by intersection or
// by projection onto a host segment win over raw endpoints, which keeps the
// snapping idempotent (a point already on a segment projects onto itself).
struct Candidate {
    Vec2 p;
    int priority;  // 2: crossing, 1: projection onto segment, 0: endpoint
};

}  // namespace

ProcessedNetwork process_network(const FractureNetwork2& net)
{
    const double tol = net.tol > 0.0 ? net.tol : 1e-8 * net.domain.diagonal();
    const Rect& dom = net.domain;

    // Clip fractures to the domain rectangle.
    std::vector<Segment> clipped;
    clipped.reserve(net.fractures.size());
    for (std::size_t i = 0; i < net.fractures.size(); ++i) {
        auto c = clip_to_rect(net.fractures[i], dom);
        if (!c || c->length() <= tol)
            throw GeometryError("fracture " + std::to_string(i)
                                + " lies outside the domain (or clips to zero length)");
        clipped.push_back(*c);
    }
    const int nf = static_cast<int>(clipped.size());

    // Reject collinear overlaps; they have no unambiguous provenance.
    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j)
            if (collinear_overlap(clipped[i], clipped[j], tol))
                throw GeometryError("fractures " + std::to_string(i) + " and " + std::to_string(j)
                                    + " overlap along a common line; unsupported geometry");

    // Collect candidate points: endpoints, crossings, and T-style projections
    // of endpoints onto nearby segment interiors.
    std::vector<Candidate> cand;
    for (int i = 0; i < nf; ++i) {
        cand.push_back({clipped[i].a, 0});
        cand.push_back({clipped[i].b, 0});
    }
    for (int i = 0; i < nf; ++i) {
        for (int j = i + 1; j < nf; ++j) {
            if (auto x = segment_intersection(clipped[i], clipped[j], tol))
                cand.push_back({*x, 2});
        }
    }
    for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j) {
            if (i == j) continue;
            for (const Vec2& e : {clipped[i].a, clipped[i].b}) {
                if (point_segment_distance(e, clipped[j]) <= tol) {
                    const double t = project_param(clipped[j], e);
                    cand.push_back({clipped[j].point_at(t), 1});
                }
            }
        }
    }

    // Greedy clustering within tol; representative = highest priority seen
    // (first wins on ties, which keeps the result deterministic).
    std::vector<Vec2> points;
    std::vector<int> prio;
    for (const auto& c : cand) {
        int hit = -1;
        for (std::size_t k = 0; k < points.size(); ++k) {
            if ((points[k] - c.p).norm() <= tol) {
                hit = static_cast<int>(k);
                break;
            }
        }
        if (hit < 0) {
            points.push_back(c.p);
            prio.push_back(c.priority);
        } else if (c.priority > prio[hit]) {
            points[hit] = c.p;
            prio[hit] = c.priority;
        }
    }
    // Clamp near-boundary points exactly onto the rectangle.
    for (auto& p : points) {
        if (std::abs(p.x() - dom.xmin) <= tol) p.x() = dom.xmin;
        if (std::abs(p.x() - dom.xmax) <= tol) p.x() = dom.xmax;
        if (std::abs(p.y() - dom.ymin) <= tol) p.y() = dom.ymin;
        if (std::abs(p.y() - dom.ymax) <= tol) p.y() = dom.ymax;
    }

    ProcessedNetwork out;
    out.num_fractures = nf;
    out.domain = dom;
    out.tol = tol;
    out.points = points;
    out.point_info.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k)
        out.point_info[k].on_boundary = dom.boundary_distance(points[k]) <= tol;

    // Split each fracture at every point lying on it.
    for (int f = 0; f < nf; ++f) {
        const Segment& s = clipped[f];
        std::vector<std::pair<double, int>> stations;  // (arc parameter, point id)
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (point_segment_distance(points[k], s) <= tol)
                stations.emplace_back(project_param(s, points[k]), static_cast<int>(k));
        }
        std::sort(stations.begin(), stations.end());
        if (stations.size() < 2)
            throw GeometryError("fracture " + std::to_string(f) + ": endpoint snapping collapsed it");
        for (std::size_t k = 0; k + 1 < stations.size(); ++k) {
            out.segments.push_back({stations[k].second, stations[k + 1].second, f});
        }
        for (std::size_t k = 0; k < stations.size(); ++k) {
            auto& info = out.point_info[stations[k].second];
            info.fractures.push_back(f);
            if (k > 0 && k + 1 < stations.size()) info.interior_of.push_back(f);
        }
    }

    // Sanity: all points pairwise distinct by more than tol.
    for (std::size_t a = 0; a < out.points.size(); ++a)
        for (std::size_t b = a + 1; b < out.points.size(); ++b)
            if ((out.points[a] - out.points[b]).norm() <= tol)
                throw GeometryError("snapping produced coincident points; reduce tol");

    return out;
}

}  // namespace dfm
