#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include <dfm2d/errors.hpp>
#include <dfm2d/linalg.hpp>
#include <dfm2d/mdgraph.hpp>

using namespace dfm;

namespace {

// Nonzero entries of one sparse-matrix row.
std::vector<double> row_values(const SpMat& m, int r)
{
    std::vector<double> out;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            if (it.row() == r && it.value() != 0.0) out.push_back(it.value());
    return out;
}

MixedDimGraph single_fracture_graph(int refinement = 1, std::uint64_t seed = 0)
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}}, Rect{0, 0, 1, 1});
    return build_mixed_grid(net, {1e-9, 0.1, 0.15}, refinement, seed);
}

MixedDimGraph x_crossing_graph()
{
    FractureNetwork2 net({{{0.2, 0.2}, {0.8, 0.8}}, {{0.2, 0.8}, {0.8, 0.2}}},
                         Rect{0, 0, 1, 1});
    return build_mixed_grid(net, {1e-9, 0.12, 0.2}, 1, 0);
}

}  // namespace

TEST_CASE("splitting duplicates each tagged face once, cells unchanged")
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.1, 0.15}, 0);
    int tagged = 0;
    for (int f = 0; f < g.num_faces(); ++f) tagged += (g.face_fracture[f] >= 0);

    const SplitResult sr = split_fracture_faces(g);
    CHECK(sr.grid.num_faces() == g.num_faces() + tagged);
    CHECK(sr.grid.num_cells() == g.num_cells());
    CHECK(static_cast<int>(sr.pairs.size()) == tagged);

    // every wall face is boundary-like with exactly one cell, and each cell
    // previously adjacent to a tagged face sees exactly one duplicate
    for (const auto& pr : sr.pairs) {
        CHECK(sr.grid.is_boundary_face(pr.plus_face));
        CHECK(sr.grid.is_boundary_face(pr.minus_face));
        CHECK(sr.grid.boundary_cell(pr.plus_face) != sr.grid.boundary_cell(pr.minus_face));
        // plus cell lies on the positive side of the fracture normal (0,1)
        const Vec2 cp = sr.grid.cell_centers.col(sr.grid.boundary_cell(pr.plus_face));
        const Vec2 cm = sr.grid.cell_centers.col(sr.grid.boundary_cell(pr.minus_face));
        CHECK(cp.y() > 0.5);
        CHECK(cm.y() < 0.5);
    }
}

TEST_CASE("interior fracture nodes are duplicated, tips are not")
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.1, 0.15}, 0);
    const SplitResult sr = split_fracture_faces(g);

    // count node copies per coordinate along the fracture line
    auto copies_at = [&](const Vec2& p) {
        int n = 0;
        for (int i = 0; i < sr.grid.num_nodes(); ++i)
            if ((sr.grid.nodes.col(i) - p).norm() < 1e-12) ++n;
        return n;
    };
    CHECK(copies_at(Vec2(0.25, 0.5)) == 1);  // tip
    CHECK(copies_at(Vec2(0.75, 0.5)) == 1);  // tip
    // an interior seed point on the fracture occurs twice
    int dup = 0, single = 0;
    for (int i = 0; i < g.num_nodes(); ++i) {
        const Vec2 p = g.nodes.col(i);
        if (std::abs(p.y() - 0.5) < 1e-12 && p.x() > 0.26 && p.x() < 0.74) {
            const int c = copies_at(p);
            if (c == 2) ++dup;
            if (c == 1) ++single;
        }
    }
    CHECK(dup > 0);
    CHECK(single == 0);
}

TEST_CASE("X-crossing: the crossing node splits into 4 sector copies")
{
    FractureNetwork2 net({{{0.2, 0.2}, {0.8, 0.8}}, {{0.2, 0.8}, {0.8, 0.2}}},
                         Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.12, 0.2}, 0);
    const SplitResult sr = split_fracture_faces(g);
    int copies = 0;
    std::vector<int> copy_ids;
    for (int i = 0; i < sr.grid.num_nodes(); ++i)
        if ((sr.grid.nodes.col(i) - Vec2(0.5, 0.5)).norm() < 1e-12) {
            ++copies;
            copy_ids.push_back(i);
        }
    CHECK(copies == 4);

    // brute-force sector enumeration: quadrant of incident cell centers
    std::set<int> quadrants;
    for (int c = 0; c < sr.grid.num_cells(); ++c) {
        for (int f : sr.grid.cell_face_list(c)) {
            for (int n : sr.grid.face_nodes[f]) {
                if (std::find(copy_ids.begin(), copy_ids.end(), n) != copy_ids.end()) {
                    const Vec2 d = sr.grid.cell_centers.col(c) - Vec2(0.5, 0.5);
                    // quadrants relative to the rotated (diagonal) axes
                    const double a = d.x() + d.y(), b = d.x() - d.y();
                    quadrants.insert((a > 0 ? 1 : 0) + (b > 0 ? 2 : 0));
                }
            }
        }
    }
    CHECK(quadrants.size() == 4);
}

TEST_CASE("extract_lower: 1d cells match wall pairs and lengths")
{
    FractureNetwork2 net({{{0.25, 0.5}, {0.75, 0.5}}}, Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.1, 0.15}, 0);
    const SplitResult sr = split_fracture_faces(g);
    const LowerDecomposition lo = extract_lower(sr, pnet);

    REQUIRE(lo.fractures.size() == 1);
    const auto& fg = lo.fractures[0];
    CHECK(fg.grid.num_cells() == static_cast<int>(fg.pairs.size()));
    double len1d = 0, len2d = 0;
    for (int c = 0; c < fg.grid.num_cells(); ++c) len1d += fg.grid.cell_measures(c);
    for (const auto& pr : fg.pairs) len2d += sr.grid.face_measures(pr.plus_face);
    CHECK(len1d == doctest::Approx(len2d).epsilon(1e-12));
    CHECK(len1d == doctest::Approx(0.5).epsilon(1e-12));

    // isolated fracture: no 0d grids, tips tagged
    CHECK(lo.points.empty());
    int tips = 0;
    for (int f = 0; f < fg.grid.num_faces(); ++f)
        tips += (fg.grid.face_tags[f] & TagTip) ? 1 : 0;
    CHECK(tips == 2);
}

TEST_CASE("extract_lower: X-crossing produces one 0d grid referenced by both fractures")
{
    FractureNetwork2 net({{{0.2, 0.2}, {0.8, 0.8}}, {{0.2, 0.8}, {0.8, 0.2}}},
                         Rect{0, 0, 1, 1});
    const auto pnet = process_network(net);
    Grid g = triangulate(pnet, {1e-9, 0.12, 0.2}, 0);
    const SplitResult sr = split_fracture_faces(g);
    const LowerDecomposition lo = extract_lower(sr, pnet);

    CHECK(lo.points.size() == 1);
    REQUIRE(lo.fractures.size() == 2);
    for (const auto& fg : lo.fractures) {
        REQUIRE(fg.point_contacts.size() == 1);
        CHECK(fg.point_contacts[0].point == lo.points[0].point);
        CHECK(fg.point_contacts[0].faces_1d.size() == 2);  // crossing: both branches
    }
}

TEST_CASE("graph structure: X-crossing has 4 nodes and 4 edges")
{
    const MixedDimGraph g = x_crossing_graph();
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 4);
    for (const auto& e : g.edges)
        CHECK(g.nodes[e.high].dim == g.nodes[e.low].dim + 1);

    // neighbor sets: a 1d node has one higher and one lower interface
    const NeighborSplit ns = g.sorted_neighbors(g.fracture_nodes[0]);
    CHECK(ns.higher.size() == 1);
    CHECK(ns.lower.size() == 1);
    CHECK(g.sorted_neighbors(g.matrix_node).higher.empty());
    for (const auto& [pt, nid] : g.point_nodes) CHECK(g.sorted_neighbors(nid).lower.empty());

    // every edge appears exactly twice over all neighbor sets
    std::map<int, int> seen;
    for (int n = 0; n < g.num_nodes(); ++n) {
        const auto s = g.sorted_neighbors(n);
        for (int e : s.higher) seen[e]++;
        for (int e : s.lower) seen[e]++;
    }
    for (const auto& [e, count] : seen) CHECK(count == 2);
    CHECK(seen.size() == static_cast<std::size_t>(g.num_edges()));
}

TEST_CASE("single isolated fracture graph: 2 nodes, 1 edge")
{
    const MixedDimGraph g = single_fracture_graph();
    CHECK(g.num_nodes() == 2);
    CHECK(g.num_edges() == 1);
}

TEST_CASE("edge between equal dimensions is rejected")
{
    MixedDimGraph g;
    g.add_node(1, make_line_grid({Vec2(0, 0), Vec2(1, 0)}));
    g.add_node(1, make_line_grid({Vec2(0, 1), Vec2(1, 1)}));
    CHECK_THROWS_AS(g.add_edge(0, 1, MortarGrid{}), GeometryError);
}

TEST_CASE("matching mortar projections are permutations")
{
    const MixedDimGraph g = single_fracture_graph(1);
    const MortarGrid& m = g.edges[0].mortar;
    CHECK(m.num_sides == 2);
    CHECK(m.cells_per_side == g.nodes[g.fracture_nodes[0]].grid.num_cells());

    // each row of the averaging maps has a single unit entry
    for (int r = 0; r < m.secondary_avg.rows(); ++r) {
        const auto sec = row_values(m.secondary_avg, r);
        const auto pri = row_values(m.primary_avg, r);
        REQUIRE(sec.size() == 1);
        REQUIRE(pri.size() == 1);
        CHECK(sec[0] == doctest::Approx(1.0));
        CHECK(pri[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("2:1 refined lower grid: intensive rows have two 0.5 entries")
{
    const MixedDimGraph g = single_fracture_graph(2);
    const MortarGrid& m = g.edges[0].mortar;
    const Grid& g1 = g.nodes[g.fracture_nodes[0]].grid;
    CHECK(g1.num_cells() == 2 * m.cells_per_side);

    // Oracle: brute-force interval overlap of uniform refinement is 1/2 each.
    for (int r = 0; r < m.secondary_avg.rows(); ++r) {
        const auto vals = row_values(m.secondary_avg, r);
        REQUIRE(vals.size() == 2);
        for (double v : vals) CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("mortar projection properties on random refinements")
{
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const int r = 1 + static_cast<int>(rng() % 3);
        const MixedDimGraph g = single_fracture_graph(r, rng() % 11);
        const MortarGrid& m = g.edges[0].mortar;
        const int nm = m.num_cells();
        const int ncl = static_cast<int>(m.to_secondary_avg.rows());

        // partition of unity: averaging projections map 1 to 1
        Vec ones_l = Vec::Ones(ncl);
        Vec proj = m.secondary_avg * ones_l;
        for (int i = 0; i < nm; ++i) CHECK(proj(i) == doctest::Approx(1.0).epsilon(1e-12));

        // extensive conservation: total over targets equals total over mortar
        std::uniform_real_distribution<double> u(-1, 1);
        Vec y(nm);
        for (int i = 0; i < nm; ++i) y(i) = u(rng);
        CHECK((m.to_secondary_int * y).sum() == doctest::Approx(y.sum()).epsilon(1e-12));

        // measure-weighted duality between the averaging pair, and the plain
        // transpose duality between averaging and integrating variants
        Vec x(ncl);
        const Grid& g1 = g.nodes[g.fracture_nodes[0]].grid;
        for (int i = 0; i < ncl; ++i) x(i) = u(rng);
        const double lhs = (m.secondary_avg * x).dot(m.cell_measures.cwiseProduct(y));
        const double rhs = x.dot(g1.cell_measures.cwiseProduct(m.to_secondary_avg * y));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        const double lhs2 = (m.secondary_avg * x).dot(y);
        const double rhs2 = x.dot(m.to_secondary_int * y);
        CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-12));
    }
}

TEST_CASE("pipeline conservation: wall measures equal 1d cell measures")
{
    const MixedDimGraph g = x_crossing_graph();
    for (const auto& e : g.edges) {
        if (e.fracture < 0 || g.nodes[e.low].dim != 1) continue;
        const Grid& g1 = g.nodes[e.low].grid;
        double wall = 0;
        for (const auto& pr : e.pairs) wall += g.nodes[e.high].grid.face_measures(pr.plus_face);
        CHECK(g1.cell_measures.sum() == doctest::Approx(wall).epsilon(1e-12));
    }
}
