#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <map>
#include <set>

#include "cellflow/triangulation.hpp"

using namespace cellflow;
using Catch::Matchers::WithinAbs;

namespace {

std::map<std::pair<int, int>, int> edge_use_counts(const Mesh2D& mesh) {
    std::map<std::pair<int, int>, int> counts;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++counts[{a, b}];
        }
    return counts;
}

double tri_area(const Mesh2D& m, const std::array<int, 3>& t) {
    const auto &p = m.vertices[t[0]], &q = m.vertices[t[1]], &r = m.vertices[t[2]];
    return 0.5 * ((q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x()));
}

} // namespace

TEST_CASE("full-square triangulation is conforming with unit area", "[triangulation]") {
    const Mesh2D mesh = triangulate_cross_section(std::nullopt, 0.25);
    CHECK_THAT(mesh.area(), WithinAbs(1.0, 1e-12));
    for (const auto& t : mesh.triangles) CHECK(tri_area(mesh, t) > 0.0);
    // Conformity: every edge belongs to one (boundary) or two triangles.
    for (const auto& [edge, count] : edge_use_counts(mesh)) {
        CHECK(count >= 1);
        CHECK(count <= 2);
    }
}

TEST_CASE("disk-hole triangulation matches the polygon complement exactly", "[triangulation]") {
    const auto poly = build_inclusion_polygon(InclusionShape::disk(0.3), 64);
    const Mesh2D mesh = triangulate_cross_section(poly, 0.1);
    CHECK_THAT(mesh.area(), WithinAbs(1.0 - poly.area(), 1e-10));
    for (const auto& t : mesh.triangles) CHECK(tri_area(mesh, t) > 0.0);

    // Boundary edges (used once) must exactly cover the square sides and the
    // polygon; interior edges are shared by two triangles.
    std::set<std::pair<double, double>> poly_pts;
    for (const auto& p : poly.pts) poly_pts.insert({p.x(), p.y()});
    int square_edges = 0, polygon_edges = 0;
    for (const auto& [edge, count] : edge_use_counts(mesh)) {
        REQUIRE(count <= 2);
        if (count == 2) continue;
        const auto& a = mesh.vertices[edge.first];
        const auto& b = mesh.vertices[edge.second];
        const bool on_side =
            (a.x() == b.x() && std::abs(a.x()) == 0.5) || (a.y() == b.y() && std::abs(a.y()) == 0.5);
        const bool on_poly = poly_pts.count({a.x(), a.y()}) && poly_pts.count({b.x(), b.y()});
        REQUIRE((on_side || on_poly));
        (on_side ? square_edges : polygon_edges) += 1;
    }
    CHECK(square_edges == 4 * 10); // h = 0.1 -> 10 ticks per side
    CHECK(polygon_edges == 64);
}

TEST_CASE("sparse polygon chords are recovered as constrained edges", "[triangulation]") {
    // A 4-gon hole has chords much longer than h, forcing edge recovery.
    const auto rhombus = build_inclusion_polygon(InclusionShape::ellipse(0.3, 0.1), 4);
    const Mesh2D mesh = triangulate_cross_section(rhombus, 0.1);
    CHECK_THAT(mesh.area(), WithinAbs(1.0 - rhombus.area(), 1e-10));
    int polygon_edges = 0;
    for (const auto& [edge, count] : edge_use_counts(mesh)) {
        if (count != 1) continue;
        const auto& a = mesh.vertices[edge.first];
        const auto& b = mesh.vertices[edge.second];
        if (std::abs(a.x()) == 0.5 || std::abs(a.y()) == 0.5) continue;
        (void)b;
        ++polygon_edges;
    }
    CHECK(polygon_edges == 4);
}

TEST_CASE("invalid polygons are rejected", "[triangulation]") {
    Polygon2D bowtie;
    bowtie.pts = {{-0.2, -0.2}, {0.2, 0.2}, {0.2, -0.2}, {-0.2, 0.2}};
    CHECK_THROWS_AS(triangulate_cross_section(bowtie, 0.2), MeshFailure);

    Polygon2D touching;
    touching.pts = {{0.5, 0.0}, {-0.2, 0.2}, {-0.2, -0.2}};
    CHECK_THROWS_AS(triangulate_cross_section(touching, 0.2), ClearanceViolation);

    Polygon2D clockwise;
    clockwise.pts = {{-0.2, -0.2}, {-0.2, 0.2}, {0.2, 0.2}, {0.2, -0.2}};
    CHECK_THROWS_AS(triangulate_cross_section(clockwise, 0.2), MeshFailure);
}

TEST_CASE("refinement scales the triangle count quadratically", "[triangulation]") {
    const auto poly = build_inclusion_polygon(InclusionShape::disk(0.2), 64);
    const auto coarse = triangulate_cross_section(poly, 0.08);
    const auto fine = triangulate_cross_section(poly, 0.04);
    const double ratio = static_cast<double>(fine.triangles.size()) / coarse.triangles.size();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 6.0);
}

TEST_CASE("opposite sides carry identical tick distributions", "[triangulation]") {
    const Mesh2D mesh = triangulate_cross_section(std::nullopt, 0.21); // m = 5
    std::vector<double> lo, hi;
    for (const auto& v : mesh.vertices) {
        if (v.x() == -0.5) lo.push_back(v.y());
        if (v.x() == 0.5) hi.push_back(v.y());
    }
    std::sort(lo.begin(), lo.end());
    std::sort(hi.begin(), hi.end());
    REQUIRE(lo.size() == hi.size());
    for (size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] == hi[i]); // bitwise
}
