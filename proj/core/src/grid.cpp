#include "dfm2d/grid.hpp"

#include <map>

#include "dfm2d/errors.hpp"

namespace dfm {

void compute_geometry(Grid& g)
{
    const int nc = g.num_cells();
    const int nf = g.num_faces();
    g.cell_centers.resize(2, nc);
    g.cell_measures.resize(nc);
    g.face_centers.resize(2, nf);
    g.face_measures.resize(nf);
    g.face_normals.resize(2, nf);
    if (g.face_fracture.empty()) g.face_fracture.assign(nf, -1);
    if (g.face_tags.empty()) g.face_tags.assign(nf, 0);

    if (g.dim == 0) {
        g.cell_centers.col(0) = g.nodes.col(0);
        g.cell_measures(0) = 1.0;
        g.face_cells.clear();
        return;
    }

    // Face geometry first.
    for (int f = 0; f < nf; ++f) {
        if (g.dim == 2) {
            const Vec2 p0 = g.nodes.col(g.face_nodes[f][0]);
            const Vec2 p1 = g.nodes.col(g.face_nodes[f][1]);
            const Vec2 e = p1 - p0;
            const double len = e.norm();
            if (len <= 0.0) throw GeometryError("degenerate face " + std::to_string(f));
            g.face_centers.col(f) = 0.5 * (p0 + p1);
            g.face_measures(f) = len;
            g.face_normals.col(f) = Vec2(e.y(), -e.x()) / len;
        } else {
            g.face_centers.col(f) = g.nodes.col(g.face_nodes[f][0]);
            g.face_measures(f) = 1.0;
            // 1d face normals are set below from the cell tangent.
        }
    }

    // Cell geometry.
    for (int c = 0; c < nc; ++c) {
        const auto faces = g.cell_face_list(c);
        if (g.dim == 2) {
            if (faces.size() != 3)
                throw GeometryError("cell " + std::to_string(c) + ": only triangles supported");
            // Unique corner nodes of the triangle.
            std::vector<int> corners;
            for (int f : faces)
                for (int n : g.face_nodes[f])
                    if (std::find(corners.begin(), corners.end(), n) == corners.end())
                        corners.push_back(n);
            if (corners.size() != 3)
                throw GeometryError("cell " + std::to_string(c) + ": inconsistent face nodes");
            const Vec2 a = g.nodes.col(corners[0]), b = g.nodes.col(corners[1]),
                       d = g.nodes.col(corners[2]);
            const double area = 0.5 * std::abs(cross2(b - a, d - a));
            if (area <= 0.0)
                throw GeometryError("cell " + std::to_string(c) + " has zero area");
            g.cell_measures(c) = area;
            g.cell_centers.col(c) = (a + b + d) / 3.0;
        } else {
            if (faces.size() != 2)
                throw GeometryError("1d cell " + std::to_string(c) + " must have 2 faces");
            const Vec2 p0 = g.face_centers.col(faces[0]);
            const Vec2 p1 = g.face_centers.col(faces[1]);
            const double len = (p1 - p0).norm();
            if (len <= 0.0) throw GeometryError("1d cell " + std::to_string(c) + " has zero length");
            g.cell_measures(c) = len;
            g.cell_centers.col(c) = 0.5 * (p0 + p1);
        }
    }

    // 1d face normals: unit tangent of the incident cell, pointing such that
    // the stored normal is consistent across the (up to two) incident cells.
    if (g.dim == 1) {
        g.face_normals.setZero();
        for (int c = 0; c < nc; ++c) {
            for (int i = g.cell_face_ptr[c]; i < g.cell_face_ptr[c + 1]; ++i) {
                const int f = g.cell_faces[i];
                if (g.face_normals.col(f).norm() > 0) continue;
                Vec2 t = g.face_centers.col(f) - g.cell_centers.col(c);
                g.face_normals.col(f) = t / t.norm();  // outward from this cell
            }
        }
    }

    // Orientation signs and face_cells from geometry.
    g.face_cells.assign(nf, {-1, -1});
    g.cell_face_sign.assign(g.cell_faces.size(), 0);
    for (int c = 0; c < nc; ++c) {
        for (int i = g.cell_face_ptr[c]; i < g.cell_face_ptr[c + 1]; ++i) {
            const int f = g.cell_faces[i];
            const Vec2 outward = g.face_centers.col(f) - g.cell_centers.col(c);
            const std::int8_t s = outward.dot(g.face_normals.col(f)) > 0 ? 1 : -1;
            g.cell_face_sign[i] = s;
            const int slot = s > 0 ? 0 : 1;
            if (g.face_cells[f][slot] >= 0)
                throw GeometryError("face " + std::to_string(f)
                                    + ": two cells on the same side (inverted cell?)");
            g.face_cells[f][slot] = c;
        }
    }
}

Grid make_triangle_grid(const Eigen::Matrix2Xd& nodes,
                        const std::vector<std::array<int, 3>>& tri_nodes,
                        const std::vector<std::array<int, 3>>& edge_tags)
{
    Grid g;
    g.dim = 2;
    g.nodes = nodes;

    std::map<std::pair<int, int>, int> face_of_edge;
    g.cell_face_ptr.push_back(0);
    for (std::size_t t = 0; t < tri_nodes.size(); ++t) {
        const auto& tri = tri_nodes[t];
        for (int k = 0; k < 3; ++k) {
            const int n0 = tri[k], n1 = tri[(k + 1) % 3];
            const auto key = std::minmax(n0, n1);
            auto it = face_of_edge.find(key);
            int f;
            if (it == face_of_edge.end()) {
                f = static_cast<int>(g.face_nodes.size());
                g.face_nodes.push_back({n0, n1});
                g.face_fracture.push_back(-1);
                g.face_tags.push_back(0);
                face_of_edge.emplace(key, f);
            } else {
                f = it->second;
            }
            if (!edge_tags.empty() && edge_tags[t][k] >= 0) g.face_fracture[f] = edge_tags[t][k];
            g.cell_faces.push_back(f);
        }
        g.cell_face_ptr.push_back(static_cast<int>(g.cell_faces.size()));
    }
    compute_geometry(g);
    for (int f = 0; f < g.num_faces(); ++f)
        if (g.is_boundary_face(f)) g.face_tags[f] |= TagDomainBoundary;
    return g;
}

Grid make_line_grid(const std::vector<Vec2>& breakpoints)
{
    const int nn = static_cast<int>(breakpoints.size());
    if (nn < 2) throw GeometryError("line grid needs at least 2 breakpoints");
    Grid g;
    g.dim = 1;
    g.nodes.resize(2, nn);
    for (int i = 0; i < nn; ++i) g.nodes.col(i) = breakpoints[i];
    g.face_nodes.resize(nn);
    for (int i = 0; i < nn; ++i) g.face_nodes[i] = {i, -1};
    g.cell_face_ptr.push_back(0);
    for (int c = 0; c + 1 < nn; ++c) {
        g.cell_faces.push_back(c);
        g.cell_faces.push_back(c + 1);
        g.cell_face_ptr.push_back(static_cast<int>(g.cell_faces.size()));
    }
    compute_geometry(g);
    return g;
}

Grid make_point_grid(const Vec2& p)
{
    Grid g;
    g.dim = 0;
    g.nodes.resize(2, 1);
    g.nodes.col(0) = p;
    g.cell_face_ptr = {0, 0};
    compute_geometry(g);
    return g;
}

Grid structured_triangle_grid(int nx, int ny, const Rect& r)
{
    Eigen::Matrix2Xd nodes(2, (nx + 1) * (ny + 1));
    auto nid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.col(nid(i, j)) = Vec2(r.xmin + r.width() * i / nx, r.ymin + r.height() * j / ny);
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.push_back({nid(i, j), nid(i + 1, j), nid(i + 1, j + 1)});
            tris.push_back({nid(i, j), nid(i + 1, j + 1), nid(i, j + 1)});
        }
    }
    return make_triangle_grid(nodes, tris);
}

Grid crisscross_triangle_grid(int nx, int ny, const Rect& r)
{
    const int base = (nx + 1) * (ny + 1);
    Eigen::Matrix2Xd nodes(2, base + nx * ny);
    auto nid = [&](int i, int j) { return j * (nx + 1) + i; };
    auto cid = [&](int i, int j) { return base + j * nx + i; };
    const double hx = r.width() / nx, hy = r.height() / ny;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.col(nid(i, j)) = Vec2(r.xmin + hx * i, r.ymin + hy * j);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            nodes.col(cid(i, j)) = Vec2(r.xmin + hx * (i + 0.5), r.ymin + hy * (j + 0.5));
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int c = cid(i, j);
            tris.push_back({nid(i, j), nid(i + 1, j), c});
            tris.push_back({nid(i + 1, j), nid(i + 1, j + 1), c});
            tris.push_back({nid(i + 1, j + 1), nid(i, j + 1), c});
            tris.push_back({nid(i, j + 1), nid(i, j), c});
        }
    }
    return make_triangle_grid(nodes, tris);
}

Grid equilateral_triangle_grid(int nx, int ny, double h, const Vec2& origin)
{
    const double ry = h * std::sqrt(3.0) / 2.0;
    Eigen::Matrix2Xd nodes(2, (nx + 1) * (ny + 1));
    auto nid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.col(nid(i, j)) = origin + Vec2((i + 0.5 * j) * h, j * ry);
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.push_back({nid(i, j), nid(i + 1, j), nid(i, j + 1)});
            tris.push_back({nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)});
        }
    }
    return make_triangle_grid(nodes, tris);
}

}  // namespace dfm
