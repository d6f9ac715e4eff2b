#include "dfm2d/split.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "dfm2d/errors.hpp"

namespace dfm {

namespace {

struct Incidence {
    std::vector<std::vector<int>> node_cells;
    std::vector<std::vector<int>> node_faces;
};

Incidence build_incidence(const Grid& g)
{
    Incidence inc;
    inc.node_cells.resize(g.num_nodes());
    inc.node_faces.resize(g.num_nodes());
    for (int f = 0; f < g.num_faces(); ++f)
        for (int n : g.face_nodes[f])
            if (n >= 0) inc.node_faces[n].push_back(f);
    for (int c = 0; c < g.num_cells(); ++c) {
        for (int f : g.cell_face_list(c)) {
            for (int n : g.face_nodes[f]) {
                if (n < 0) continue;
                auto& v = inc.node_cells[n];
                if (std::find(v.begin(), v.end(), c) == v.end()) v.push_back(c);
            }
        }
    }
    return inc;
}

}  // namespace

SplitResult split_fracture_faces(const Grid& g_in)
{
    SplitResult out;
    Grid& g = out.grid;
    g = g_in;

    std::vector<int> tagged;
    for (int f = 0; f < g.num_faces(); ++f) {
        if (g.face_fracture[f] < 0) continue;
        if (g.is_boundary_face(f))
            throw MeshError("fracture face " + std::to_string(f)
                            + " lies on the global boundary");
        tagged.push_back(f);
    }

    const Incidence inc = build_incidence(g);
    std::vector<char> is_tagged(g.num_faces(), 0);
    for (int f : tagged) is_tagged[f] = 1;

    // Sector decomposition around every node touching a tagged face. Two
    // cells incident to the node are in the same sector when they share an
    // untagged face through that node.
    // sector_node[(node, cell)] -> node id to use after splitting.
    std::map<std::pair<int, int>, int> sector_node;
    std::vector<Vec2> new_nodes;
    for (int n = 0; n < g.num_nodes(); ++n) {
        bool touches = false;
        for (int f : inc.node_faces[n]) touches |= static_cast<bool>(is_tagged[f]);
        if (!touches) continue;

        const auto& cells = inc.node_cells[n];
        const int m = static_cast<int>(cells.size());
        std::vector<int> comp(m);
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> find = [&](int i) {
            while (comp[i] != i) i = comp[i] = comp[comp[i]];
            return i;
        };
        for (int f : inc.node_faces[n]) {
            if (is_tagged[f]) continue;
            const int c0 = g.face_cells[f][0], c1 = g.face_cells[f][1];
            if (c0 < 0 || c1 < 0) continue;
            const auto i0 = std::find(cells.begin(), cells.end(), c0);
            const auto i1 = std::find(cells.begin(), cells.end(), c1);
            if (i0 == cells.end() || i1 == cells.end()) continue;
            comp[find(static_cast<int>(i0 - cells.begin()))] =
                find(static_cast<int>(i1 - cells.begin()));
        }
        std::map<int, int> sector_id;  // component root -> node id
        for (int i = 0; i < m; ++i) {
            const int root = find(i);
            auto it = sector_id.find(root);
            int nid;
            if (it == sector_id.end()) {
                nid = sector_id.empty()
                          ? n
                          : g.num_nodes() + static_cast<int>(new_nodes.size());
                if (nid != n) new_nodes.push_back(g.nodes.col(n));
                sector_id.emplace(root, nid);
            } else {
                nid = it->second;
            }
            sector_node[{n, cells[i]}] = nid;
        }
    }
    if (!new_nodes.empty()) {
        const int old_nn = g.num_nodes();
        Eigen::Matrix2Xd nodes(2, old_nn + static_cast<int>(new_nodes.size()));
        nodes.leftCols(old_nn) = g.nodes;
        for (std::size_t i = 0; i < new_nodes.size(); ++i)
            nodes.col(old_nn + static_cast<int>(i)) = new_nodes[i];
        g.nodes = std::move(nodes);
    }

    // Duplicate tagged faces: the original keeps the cell the stored normal
    // leaves, the duplicate takes the other cell.
    for (int f : tagged) {
        const int c_out = g.face_cells[f][0];  // normal points out of this cell
        const int c_in = g.face_cells[f][1];
        const int fnew = g.num_faces();
        g.face_nodes.push_back(g.face_nodes[f]);
        g.face_fracture.push_back(g.face_fracture[f]);
        g.face_tags.push_back(g.face_tags[f] | TagFractureWall);
        g.face_tags[f] |= TagFractureWall;
        for (int i = g.cell_face_ptr[c_in]; i < g.cell_face_ptr[c_in + 1]; ++i)
            if (g.cell_faces[i] == f) g.cell_faces[i] = fnew;

        // Provisional side assignment; fixed up geometrically below.
        out.pairs.push_back({g.face_fracture[f], fnew, f});
        (void)c_out;
    }

    // Remap face nodes to the sector copies of their cells. Both cells of an
    // untagged interior face share a sector by construction, so any incident
    // cell determines the copy.
    std::vector<int> any_cell(g.num_faces(), -1);
    for (int c = 0; c < g.num_cells(); ++c)
        for (int f : g.cell_face_list(c)) any_cell[f] = c;
    for (int f = 0; f < g.num_faces(); ++f) {
        const int c = any_cell[f];
        if (c < 0) throw MeshError("orphan face after splitting");
        for (int& n : g.face_nodes[f]) {
            if (n < 0) continue;
            auto it = sector_node.find({n, c});
            if (it != sector_node.end()) n = it->second;
        }
    }

    compute_geometry(g);

    // Sort out plus/minus sides now that geometry is fresh: the plus cell
    // center lies on the positive side of the canonical fracture normal
    // (canonical tangent has positive x, ties broken by positive y).
    for (auto& pr : out.pairs) {
        const int f0 = pr.plus_face;
        const Vec2 fc = g.face_centers.col(f0);
        Vec2 t = (g.nodes.col(g.face_nodes[f0][1]) - g.nodes.col(g.face_nodes[f0][0]))
                     .normalized();
        if (t.x() < -1e-12 || (std::abs(t.x()) <= 1e-12 && t.y() < 0)) t = -t;
        const Vec2 frac_n(-t.y(), t.x());
        const int c0 = g.boundary_cell(f0);
        if ((g.cell_centers.col(c0) - fc).dot(frac_n) < 0)
            std::swap(pr.plus_face, pr.minus_face);
    }
    return out;
}

LowerDecomposition extract_lower(const SplitResult& split, const ProcessedNetwork& pnet,
                                 int lower_refinement)
{
    if (lower_refinement < 1) throw GeometryError("lower_refinement must be >= 1");
    const Grid& g = split.grid;
    LowerDecomposition out;

    const double tol = pnet.tol;

    // Group wall pairs per fracture.
    std::vector<std::vector<WallPair>> per_frac(pnet.num_fractures);
    for (const auto& pr : split.pairs) {
        if (pr.fracture < 0 || pr.fracture >= pnet.num_fractures)
            throw GeometryError("wall pair with unknown fracture id");
        per_frac[pr.fracture].push_back(pr);
    }

    // 0d subdomains at intersection points.
    std::map<int, int> point_grid_index;
    for (int p : pnet.intersection_points()) {
        point_grid_index[p] = static_cast<int>(out.points.size());
        Grid pg = make_point_grid(pnet.points[p]);
        pg.name = "intersection " + std::to_string(p);
        out.points.push_back({p, std::move(pg)});
    }

    for (int f = 0; f < pnet.num_fractures; ++f) {
        if (per_frac[f].empty())
            throw GeometryError("fracture " + std::to_string(f) + " has no tagged faces");
        LowerDecomposition::FractureGrid fg;
        fg.fracture = f;
        fg.refinement = lower_refinement;

        // Fracture frame from the first wall face; all faces are collinear.
        const auto& first = per_frac[f][0];
        const Vec2 p0 = g.nodes.col(g.face_nodes[first.plus_face][0]);
        const Vec2 p1 = g.nodes.col(g.face_nodes[first.plus_face][1]);
        Vec2 t = (p1 - p0).normalized();
        // Canonical direction: positive x, break ties with positive y.
        if (t.x() < -1e-12 || (std::abs(t.x()) <= 1e-12 && t.y() < 0)) t = -t;
        fg.tangent = t;
        fg.normal = Vec2(-t.y(), t.x());

        // Order wall pairs by arc-length along the tangent.
        std::vector<std::pair<double, WallPair>> stations;
        for (const auto& pr : per_frac[f])
            stations.emplace_back(t.dot(g.face_centers.col(pr.plus_face)), pr);
        std::sort(stations.begin(), stations.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        // Breakpoints from wall-face endpoints.
        std::vector<double> brk;
        std::vector<Vec2> brk_pts;
        for (std::size_t i = 0; i < stations.size(); ++i) {
            const int fp = stations[i].second.plus_face;
            const Vec2 a = g.nodes.col(g.face_nodes[fp][0]);
            const Vec2 b = g.nodes.col(g.face_nodes[fp][1]);
            double ta = t.dot(a), tb = t.dot(b);
            Vec2 pa = a, pb = b;
            if (ta > tb) {
                std::swap(ta, tb);
                std::swap(pa, pb);
            }
            if (i == 0) {
                brk.push_back(ta);
                brk_pts.push_back(pa);
            }
            if (std::abs(ta - brk.back()) > tol)
                throw GeometryError("fracture " + std::to_string(f)
                                    + ": wall faces are not contiguous");
            brk.push_back(tb);
            brk_pts.push_back(pb);
            fg.pairs.push_back(stations[i].second);
        }
        fg.breakpoints = brk;
        fg.arc_origin_offset = brk.front();

        // Refined 1d breakpoints.
        std::vector<Vec2> line_pts;
        for (std::size_t i = 0; i + 1 < brk_pts.size(); ++i) {
            line_pts.push_back(brk_pts[i]);
            for (int k = 1; k < lower_refinement; ++k)
                line_pts.push_back(brk_pts[i]
                                   + (brk_pts[i + 1] - brk_pts[i])
                                         * (static_cast<double>(k) / lower_refinement));
        }
        line_pts.push_back(brk_pts.back());
        fg.grid = make_line_grid(line_pts);
        fg.grid.dim = 1;
        fg.grid.name = "fracture " + std::to_string(f);
        Grid& g1 = fg.grid;
        g1.face_fracture.assign(g1.num_faces(), -1);
        g1.face_tags.assign(g1.num_faces(), 0);

        // Classify the end faces and split interior faces at network points.
        // Only pre-split faces are searched; duplicates are appended after.
        const int nf0 = g1.num_faces();
        auto face_at = [&](const Vec2& p) {
            for (int ff = 0; ff < nf0; ++ff)
                if ((g1.face_centers.col(ff) - p).norm() <= tol) return ff;
            return -1;
        };
        for (std::size_t k = 0; k < pnet.points.size(); ++k) {
            const auto& info = pnet.point_info[k];
            if (std::find(info.fractures.begin(), info.fractures.end(), f)
                == info.fractures.end())
                continue;
            const int ff = face_at(pnet.points[k]);
            if (ff < 0)
                throw GeometryError("fracture " + std::to_string(f)
                                    + ": network point is not a 1d face");
            const bool interior =
                std::find(info.interior_of.begin(), info.interior_of.end(), f)
                != info.interior_of.end();
            if (info.is_intersection()) {
                LowerDecomposition::FractureGrid::PointContact pc;
                pc.point = static_cast<int>(k);
                if (interior) {
                    // Split the interior face: the cell the normal enters
                    // gets a duplicate, both become one-sided.
                    const int c_in = g1.face_cells[ff][1];
                    const int fnew = g1.num_faces();
                    g1.face_nodes.push_back(g1.face_nodes[ff]);
                    g1.face_fracture.push_back(static_cast<int>(k));
                    g1.face_tags.push_back(0);
                    g1.face_fracture[ff] = static_cast<int>(k);
                    for (int i = g1.cell_face_ptr[c_in]; i < g1.cell_face_ptr[c_in + 1]; ++i)
                        if (g1.cell_faces[i] == ff) g1.cell_faces[i] = fnew;
                    pc.faces_1d = {ff, fnew};
                } else {
                    g1.face_fracture[ff] = static_cast<int>(k);
                    pc.faces_1d = {ff};
                }
                fg.point_contacts.push_back(std::move(pc));
            } else if (!interior) {
                // Plain fracture end: immersed tip or outer-boundary end.
                if (info.on_boundary)
                    g1.face_tags[ff] |= TagDomainBoundary;
                else
                    g1.face_tags[ff] |= TagTip;
            }
        }
        compute_geometry(g1);
        // compute_geometry resets nothing but signs/centers; keep tags as set
        out.fractures.push_back(std::move(fg));
    }
    return out;
}

}  // namespace dfm
