#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <dfm2d/errors.hpp>
#include <dfm2d/grid.hpp>
#include <dfm2d/io.hpp>
#include <dfm2d/triangulate.hpp>

using namespace dfm;

namespace {

Grid unit_right_triangle()
{
    Eigen::Matrix2Xd nodes(2, 3);
    nodes.col(0) = Vec2(0, 0);
    nodes.col(1) = Vec2(1, 0);
    nodes.col(2) = Vec2(0, 1);
    return make_triangle_grid(nodes, {{0, 1, 2}});
}

}  // namespace

TEST_CASE("unit right triangle geometry")
{
    Grid g = unit_right_triangle();
    CHECK(g.num_cells() == 1);
    CHECK(g.num_faces() == 3);
    CHECK(g.cell_measures(0) == doctest::Approx(0.5));
    CHECK(g.cell_centers(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(g.cell_centers(1, 0) == doctest::Approx(1.0 / 3.0));
    for (int f = 0; f < 3; ++f) CHECK(g.face_normals.col(f).norm() == doctest::Approx(1.0));
}

TEST_CASE("1d grid with nodes at 0, 0.3, 1.0")
{
    Grid g = make_line_grid({Vec2(0, 0), Vec2(0.3, 0), Vec2(1.0, 0)});
    CHECK(g.num_cells() == 2);
    CHECK(g.cell_measures(0) == doctest::Approx(0.3));
    CHECK(g.cell_measures(1) == doctest::Approx(0.7));
    // interior face has two cells, ends one
    CHECK(g.is_boundary_face(0));
    CHECK_FALSE(g.is_boundary_face(1));
    CHECK(g.is_boundary_face(2));
}

TEST_CASE("closed-polygon identity: signed normals sum to zero per cell")
{
    const ProcessedNetwork pnet =
        process_network(FractureNetwork2({{{0.3, 0.3}, {0.7, 0.8}}}, Rect{0, 0, 1, 1}));
    Grid g = triangulate(pnet, {1e-9, 0.15, 0.2}, 3);
    for (int c = 0; c < g.num_cells(); ++c) {
        Vec2 sum = Vec2::Zero();
        for (int i = g.cell_face_ptr[c]; i < g.cell_face_ptr[c + 1]; ++i) {
            const int f = g.cell_faces[i];
            sum += static_cast<double>(g.cell_face_sign[i]) * g.face_measures(f)
                 * g.face_normals.col(f);
        }
        CHECK(sum.norm() < 1e-12);
    }
}

TEST_CASE("degenerate cell is rejected")
{
    Eigen::Matrix2Xd nodes(2, 3);
    nodes.col(0) = Vec2(0, 0);
    nodes.col(1) = Vec2(1, 0);
    nodes.col(2) = Vec2(2, 0);  // collinear
    CHECK_THROWS_AS(make_triangle_grid(nodes, {{0, 1, 2}}), GeometryError);
}

TEST_CASE("compute_geometry is permutation covariant")
{
    Grid g = structured_triangle_grid(3, 2, Rect{0, 0, 3, 2});
    // Relabel cells by reversing the cell order; geometry must permute along.
    Grid h;
    h.dim = 2;
    h.nodes = g.nodes;
    const int nc = g.num_cells();
    h.face_nodes = g.face_nodes;
    h.cell_face_ptr.push_back(0);
    for (int c = nc - 1; c >= 0; --c) {
        for (int f : g.cell_face_list(c)) h.cell_faces.push_back(f);
        h.cell_face_ptr.push_back(static_cast<int>(h.cell_faces.size()));
    }
    compute_geometry(h);
    for (int c = 0; c < nc; ++c) {
        CHECK(h.cell_measures(c) == doctest::Approx(g.cell_measures(nc - 1 - c)));
        CHECK((h.cell_centers.col(c) - g.cell_centers.col(nc - 1 - c)).norm() < 1e-15);
    }
}

TEST_CASE("structured grid covers the rectangle")
{
    Grid g = structured_triangle_grid(4, 4, Rect{0, 0, 1, 1});
    CHECK(g.num_cells() == 32);
    CHECK(g.cell_measures.sum() == doctest::Approx(1.0));
}

TEST_CASE("triangulation of the empty network conserves area")
{
    const ProcessedNetwork pnet = process_network(FractureNetwork2({}, Rect{0, 0, 1, 1}));
    Grid g = triangulate(pnet, {1e-9, 0.5, 0.5}, 0);
    CHECK(g.cell_measures.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.num_cells() > 0);
}

TEST_CASE("triangulation recovers a fracture as mesh edges")
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.1, 0.15}, 1);
    double tagged_len = 0;
    for (int f = 0; f < g.num_faces(); ++f) {
        if (g.face_fracture[f] == 0) {
            tagged_len += g.face_measures(f);
            // every tagged edge lies exactly on the fracture line
            CHECK(std::abs(g.nodes(1, g.face_nodes[f][0]) - 0.5) < 1e-12);
            CHECK(std::abs(g.nodes(1, g.face_nodes[f][1]) - 0.5) < 1e-12);
        }
    }
    CHECK(tagged_len == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.cell_measures.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("X-crossing: intersection point is a shared mesh node")
{
    FractureNetwork2 net({{{0.2, 0.2}, {0.8, 0.8}}, {{0.2, 0.8}, {0.8, 0.2}}},
                         Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.12, 0.2}, 0);

    // Brute-force scan: the crossing must appear as a node, and tagged edges
    // of both fractures must touch it.
    int node_at = -1;
    for (int n = 0; n < g.num_nodes(); ++n)
        if ((g.nodes.col(n) - Vec2(0.5, 0.5)).norm() < 1e-12) node_at = n;
    REQUIRE(node_at >= 0);
    std::set<int> fracs_at_node;
    for (int f = 0; f < g.num_faces(); ++f)
        if (g.face_fracture[f] >= 0)
            for (int n : g.face_nodes[f])
                if (n == node_at) fracs_at_node.insert(g.face_fracture[f]);
    CHECK(fracs_at_node == std::set<int>{0, 1});

    // Total tagged length matches both fracture lengths.
    double len0 = 0, len1 = 0;
    for (int f = 0; f < g.num_faces(); ++f) {
        if (g.face_fracture[f] == 0) len0 += g.face_measures(f);
        if (g.face_fracture[f] == 1) len1 += g.face_measures(f);
    }
    const double want = (Vec2(0.8, 0.8) - Vec2(0.2, 0.2)).norm();
    CHECK(len0 == doctest::Approx(want).epsilon(1e-10));
    CHECK(len1 == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("mesh realizations differ by seed but share constraints")
{
    FractureNetwork2 net({{{0.3, 0.4}, {0.7, 0.6}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid a = triangulate(pnet, {1e-9, 0.1, 0.15}, 1);
    Grid b = triangulate(pnet, {1e-9, 0.1, 0.15}, 2);
    CHECK(a.cell_measures.sum() == doctest::Approx(b.cell_measures.sum()));
    // Seeds change the interior point cloud.
    CHECK(a.num_nodes() != b.num_nodes());
}

TEST_CASE("segment shorter than h_min is a meshing error naming the fracture")
{
    FractureNetwork2 net({{{0.5, 0.5}, {0.5001, 0.5}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    try {
        triangulate(pnet, {1e-2, 0.1, 0.1}, 0);
        FAIL("expected MeshError");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("fracture 0") != std::string::npos);
    }
}

TEST_CASE("msh round trip: two-triangle unit square")
{
    const std::string msh = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 2 2 1 1 1 2 3
2 2 2 1 1 1 3 4
$EndElements
)";
    Grid g = import_msh(msh);
    CHECK(g.num_cells() == 2);
    CHECK(g.num_faces() == 5);
    CHECK(g.num_nodes() == 4);
    CHECK(g.cell_measures.sum() == doctest::Approx(1.0));
}

TEST_CASE("msh with a quadrilateral element is rejected")
{
    const std::string msh = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
1
1 3 2 1 1 1 2 3 4
$EndElements
)";
    try {
        import_msh(msh);
        FAIL("expected MeshError");
    } catch (const MeshError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("msh export/import preserves fracture tags")
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}, {{0.5, 0.25}, {0.5, 0.75}}},
                         Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.12, 0.2}, 0);
    Grid h = import_msh(export_msh(g));
    CHECK(h.num_cells() == g.num_cells());
    for (int frac = 0; frac < 2; ++frac) {
        double lg = 0, lh = 0;
        for (int f = 0; f < g.num_faces(); ++f)
            if (g.face_fracture[f] == frac) lg += g.face_measures(f);
        for (int f = 0; f < h.num_faces(); ++f)
            if (h.face_fracture[f] == frac) lh += h.face_measures(f);
        CHECK(lh == doctest::Approx(lg));
    }
}
