#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dfm2d/geom.hpp"

namespace dfm {

/// Per-face tag bits.
enum FaceTag : std::uint8_t {
    TagDomainBoundary = 1,  // face on the outer domain boundary
    TagTip = 2,             // immersed fracture tip (1d grids)
    TagFractureWall = 4,    // one side of a split fracture face (2d grids)
};

/// Dimension-agnostic unstructured grid (0d, 1d or 2d, embedded in 2d space).
///
/// Faces are entities of co-dimension one: edges for 2d grids, points for 1d
/// grids; 0d grids have a single cell and no faces. Cell-face incidence is
/// stored in CSR form with an orientation sign: +1 when the stored face
/// normal points out of the cell.
struct Grid {
    int dim = 2;

    Eigen::Matrix2Xd nodes;  // node coordinates (always 2d ambient space)

    // face -> node incidence; 2 nodes per face in 2d, 1 node (second = -1) in 1d
    std::vector<std::array<int, 2>> face_nodes;

    // cell -> face CSR
    std::vector<int> cell_face_ptr;
    std::vector<int> cell_faces;
    std::vector<std::int8_t> cell_face_sign;

    // computed geometry
    Eigen::Matrix2Xd cell_centers;
    Eigen::VectorXd cell_measures;  // area (2d), length (1d), 1 (0d)
    Eigen::Matrix2Xd face_centers;
    Eigen::VectorXd face_measures;  // length (2d), 1 (1d)
    Eigen::Matrix2Xd face_normals;  // unit normals

    // face -> cells, derived from signs: slot 0 = cell the normal leaves,
    // slot 1 = cell the normal enters; -1 when absent
    std::vector<std::array<int, 2>> face_cells;

    // tags
    std::vector<int> face_fracture;        // fracture id for tagged faces, else -1
    std::vector<std::uint8_t> face_tags;   // FaceTag bits

    std::string name;  // diagnostic label ("matrix", "fracture 3", ...)

    int num_cells() const { return static_cast<int>(cell_face_ptr.size()) - 1; }
    int num_faces() const { return static_cast<int>(face_nodes.size()); }
    int num_nodes() const { return static_cast<int>(nodes.cols()); }

    bool is_boundary_face(int f) const
    {
        return face_cells[f][0] < 0 || face_cells[f][1] < 0;
    }
    /// The only cell of a boundary face.
    int boundary_cell(int f) const
    {
        return face_cells[f][0] >= 0 ? face_cells[f][0] : face_cells[f][1];
    }
    /// Orientation sign of face f seen from cell c (+1 = normal points out).
    int face_sign(int f, int c) const
    {
        if (face_cells[f][0] == c) return 1;
        if (face_cells[f][1] == c) return -1;
        return 0;
    }

    std::vector<int> cell_face_list(int c) const
    {
        return {cell_faces.begin() + cell_face_ptr[c], cell_faces.begin() + cell_face_ptr[c + 1]};
    }
};

/// Populate centers, measures, normals, signs and face_cells. Throws
/// GeometryError on degenerate cells. Only simplicial 2d cells (triangles),
/// 1d segments and 0d points are supported.
void compute_geometry(Grid& g);

/// Build a 2d grid from triangle soup. tri_nodes lists 3 node ids per cell.
/// tagged_edges maps (sorted) node pairs to fracture ids.
Grid make_triangle_grid(const Eigen::Matrix2Xd& nodes,
                        const std::vector<std::array<int, 3>>& tri_nodes,
                        const std::vector<std::array<int, 3>>& edge_tags = {});

/// Build a 1d grid along a given geometry: breakpoints are node coordinates
/// in order along the line.
Grid make_line_grid(const std::vector<Vec2>& breakpoints);

/// Single-point 0d grid.
Grid make_point_grid(const Vec2& p);

/// Structured right-triangle grid on a rectangle (nx-by-ny squares, each
/// split along the same diagonal).
Grid structured_triangle_grid(int nx, int ny, const Rect& r);

/// Criss-cross grid: each square split into four triangles by its center.
/// Every centroid connection is parallel to its face normal (mirror
/// symmetry), though the half-distance vectors of the diagonal faces are
/// not, so two-point fluxes are consistent only in the connection sense.
Grid crisscross_triangle_grid(int nx, int ny, const Rect& r);

/// Rhombic lattice of equilateral triangles with side h, nx columns and ny
/// rows, anchored at `origin`. Centroid connections cross every face
/// perpendicularly at its midpoint, the strongest K-orthogonality a
/// triangulation offers.
Grid equilateral_triangle_grid(int nx, int ny, double h, const Vec2& origin = Vec2(0, 0));

}  // namespace dfm
