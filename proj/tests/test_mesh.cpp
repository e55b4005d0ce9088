#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "driftlab/error.hpp"
#include "driftlab/mesh.hpp"

using namespace driftlab;

namespace {

std::size_t count_edges(const TriMesh& m) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  return edges.size();
}

}  // namespace

TEST_CASE("base fan") {
  auto m = build_disk_mesh(0);
  CHECK(m->num_vertices() == 7);
  CHECK(m->num_triangles() == 6);
  CHECK(m->boundary_edges().size() == 6);
  CHECK(m->vertices()[0].norm() == 0.0);
}

TEST_CASE("level one counts") {
  auto m = build_disk_mesh(1);
  CHECK(m->num_triangles() == 24);
  CHECK(count_edges(*m) == 42);
  CHECK(m->num_edges() == 42);
  CHECK(m->num_vertices() == 19);
  CHECK(disk_mesh_vertex_count(1) == 19);
}

TEST_CASE("mesh invariants hold at every level") {
  for (int level = 0; level <= 5; ++level) {
    CAPTURE(level);
    auto m = build_disk_mesh(level);
    const long v = static_cast<long>(m->num_vertices());
    const long e = static_cast<long>(count_edges(*m));
    const long t = static_cast<long>(m->num_triangles());
    CHECK(v - e + t == 1);
    CHECK(m->num_vertices() == disk_mesh_vertex_count(level));

    for (std::size_t i = 0; i < m->num_triangles(); ++i) CHECK(m->area(i) > 0.0);

    const auto& be = m->boundary_edges();
    CHECK(be.size() == 6u << level);
    double prev_angle = -1.0;
    double signed_area = 0.0;
    for (std::size_t k = 0; k < be.size(); ++k) {
      CHECK(be[k].v[1] == be[(k + 1) % be.size()].v[0]);
      CHECK(be[k].angle > prev_angle);
      prev_angle = be[k].angle;
      const Vec2& a = m->vertices()[be[k].v[0]];
      const Vec2& b = m->vertices()[be[k].v[1]];
      signed_area += 0.5 * (a.x() * b.y() - a.y() * b.x());
      CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
      CHECK(be[k].cell >= 0);
    }
    CHECK(signed_area > 0.0);
    CHECK(signed_area == doctest::Approx(m->total_area()).epsilon(1e-12));
  }
}

TEST_CASE("refinement is nested and halves h") {
  // The first refinement pushes the hexagon edge midpoints out to the circle,
  // so h(1)/h(0) = 0.62; from level 1 on the ratio tends to 1/2.
  CHECK(build_disk_mesh(1)->h() / build_disk_mesh(0)->h() == doctest::Approx(0.6197).epsilon(1e-3));
  for (int level = 0; level < 5; ++level) {
    CAPTURE(level);
    auto coarse = build_disk_mesh(level);
    auto fine = build_disk_mesh(level + 1);
    for (std::size_t i = 0; i < coarse->num_vertices(); ++i) {
      CHECK(fine->vertices()[i].x() == coarse->vertices()[i].x());
      CHECK(fine->vertices()[i].y() == coarse->vertices()[i].y());
    }
    if (level == 0) continue;
    const double ratio = fine->h() / coarse->h();
    CHECK(ratio >= 0.45);
    CHECK(ratio <= 0.55);
  }
}

TEST_CASE("capacity guard") {
  CHECK_THROWS_AS(build_disk_mesh(12), CapacityError);
  CHECK_THROWS_AS(build_disk_mesh(3, 100), CapacityError);
  CHECK_THROWS_AS(build_disk_mesh(-1), DomainError);
}

TEST_CASE("boundary geometry") {
  auto [n0, t0] = boundary_frame(Vec2(0.99, 0.0));
  CHECK(n0.x() == doctest::Approx(1.0));
  CHECK(n0.y() == 0.0);
  CHECK(t0.x() == 0.0);
  CHECK(t0.y() == doctest::Approx(1.0));

  auto m = build_disk_mesh(3);
  auto g = boundary_geometry(*m);
  double perimeter = 0.0;
  for (std::size_t e = 0; e < g.length.size(); ++e) {
    CHECK(g.tangent[e].dot(g.normal[e]) == 0.0);
    CHECK(g.tangent[e].norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.normal[e].norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.length[e] > 0.0);
    // the chord is orthogonal to its midpoint direction
    const auto& be = m->boundary_edges()[e];
    const Vec2 chord = m->vertices()[be.v[1]] - m->vertices()[be.v[0]];
    CHECK(std::abs(chord.normalized().dot(g.tangent[e]) - 1.0) < 1e-12);
    perimeter += g.length[e];
  }
  CHECK(perimeter <= 2 * std::numbers::pi);
  CHECK(perimeter >= 2 * std::numbers::pi - 0.01);
}

TEST_CASE("point location") {
  auto m = build_disk_mesh(3);
  for (std::size_t t = 0; t < m->num_triangles(); t += 7) {
    auto loc = m->locate(m->centroid(t));
    REQUIRE(loc.has_value());
    CHECK(loc->cell == static_cast<int>(t));
    for (double w : loc->bary) CHECK(w == doctest::Approx(1.0 / 3.0));
  }
  CHECK_FALSE(m->locate(Vec2(1.2, 0.0)).has_value());
  auto near = m->locate_nearest(Vec2(1.2, 0.0));
  double s = near.bary[0] + near.bary[1] + near.bary[2];
  CHECK(s == doctest::Approx(1.0));
}
