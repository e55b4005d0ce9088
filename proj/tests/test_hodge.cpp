#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "driftlab/hodge.hpp"

using namespace driftlab;

namespace {

CellVectorField stream_xy(const MeshPtr& m) {
  return sample_cells(m, [](const Vec2& p) { return Vec2(-p.x(), p.y()); });
}
CellVectorField radial(const MeshPtr& m) {
  return sample_cells(m, [](const Vec2& p) { return p; });
}

}  // namespace

TEST_CASE("divergence-free drift has no potential") {
  for (int level : {3, 4}) {
    auto m = build_disk_mesh(level);
    auto b = stream_xy(m);
    auto parts = hodge_decompose(b);
    CAPTURE(level);
    CHECK(norms(parts.p).l2 < 1e-9);
    const double xi_err = l2_error(parts.xi, [](const Vec2& p) { return p.x() * p.y(); });
    MESSAGE("xi error " << xi_err << " residual " << parts.residual_l2 << " h " << m->h());
    CHECK(xi_err < m->h() * m->h());
    CHECK(parts.residual_l2 <= m->h() * norms(b).l2);
    CHECK(std::abs(parts.compat_defect) < 1e-12);
  }
}

TEST_CASE("curl-free drift has no stream function") {
  for (int level : {3, 4}) {
    auto m = build_disk_mesh(level);
    auto b = radial(m);
    auto parts = hodge_decompose(b);
    CAPTURE(level);
    CHECK(norms(parts.xi).l2 < 1e-9);
    const double p_err = l2_error(parts.p, [](const Vec2& p) { return 0.5 * (1 - p.squaredNorm()); });
    MESSAGE("p error " << p_err << " residual " << parts.residual_l2);
    CHECK(p_err < m->h());
    CHECK(parts.residual_l2 <= m->h() * norms(b).l2);
  }
}

TEST_CASE("zero drift") {
  auto m = build_disk_mesh(3);
  auto parts = hodge_decompose(CellVectorField(m));
  CHECK(parts.p.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(parts.xi.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(parts.residual_l2 == 0.0);
  auto rep = smallness_report(parts);
  CHECK(rep.values.energy < 1e-20);
  CHECK(rep.values.p_inf == 1.0);
  CHECK(rep.values.pinv_inf == 1.0);
  CHECK(rep.passed());
  CHECK(smallness_report(parts, 1e-9).passed());
}

TEST_CASE("parts invariants") {
  auto m = build_disk_mesh(4);
  auto b = sample_cells(m, [](const Vec2& p) { return Vec2(std::sin(2 * p.y()) + p.x(), p.x() * p.y() - 0.3); });
  auto parts = hodge_decompose(b);
  for (int v : m->boundary_vertices()) CHECK(parts.p[v] == 0.0);
  CHECK(std::abs(mean(parts.xi)) < 1e-12);
  CHECK((parts.P.values().cwiseProduct(parts.Pinv.values()).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("gauge sup norm for the radial drift") {
  auto m = build_disk_mesh(4);
  auto rep = smallness_report(hodge_decompose(radial(m)));
  CHECK(rep.values.p_inf == doctest::Approx(std::exp(0.5)).epsilon(0.01 / std::exp(0.5)));
  CHECK_FALSE(rep.sup_ok);
  CHECK_FALSE(rep.passed());
}

TEST_CASE("stream energy is quadratic in the drift") {
  auto m = build_disk_mesh(3);
  auto b = sample_cells(m, [](const Vec2& p) { return Vec2(std::cos(p.y()), p.x() * p.x()); });
  const double e1 = std::pow(norms(hodge_decompose(b).xi).h1_semi, 2);
  const double e2 = std::pow(norms(hodge_decompose(0.5 * b).xi).h1_semi, 2);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("orthogonality, idempotence and the boundary identity") {
  auto m = build_disk_mesh(4);
  auto b = sample_cells(m, [](const Vec2& p) { return Vec2(std::exp(p.x()) - p.y(), std::sin(3 * p.x())); });
  auto parts = hodge_decompose(b);
  const auto rot = perp(gradient(parts.xi));
  const auto gp = gradient(parts.p);
  double inner = 0.0;
  for (std::size_t t = 0; t < m->num_triangles(); ++t) inner += rot[t].dot(gp[t]) * m->area(t);
  CHECK(std::abs(inner) <= 1e-10 * norms(parts.xi).h1_semi * norms(parts.p).h1_semi);

  auto again = hodge_decompose(rot - gp);
  CHECK((again.p.values() - parts.p.values()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((again.xi.values() - parts.xi.values()).cwiseAbs().maxCoeff() < 1e-8);

  // b.tau against the discrete normal derivative of xi along the boundary
  const auto geo = boundary_geometry(*m);
  const auto gxi = gradient(parts.xi);
  double mismatch = 0.0;
  for (std::size_t e = 0; e < geo.normal.size(); ++e) {
    const int cell = m->boundary_edges()[e].cell;
    mismatch += std::abs(b[cell].dot(geo.tangent[e]) - gxi[cell].dot(geo.normal[e])) * geo.length[e];
  }
  MESSAGE("boundary mismatch " << mismatch << " vs h*|b| " << m->h() * norms(b).l2);
  CHECK(mismatch <= m->h() * norms(b).l2);
}

TEST_CASE("potential bound left side") {
  auto m = build_disk_mesh(3);
  auto parts = hodge_decompose(radial(m));
  const Norms n = norms(parts.p);
  CHECK(potential_bound_lhs(parts) == doctest::Approx(n.linf + n.h1_semi));
  CHECK(potential_bound_lhs(hodge_decompose(CellVectorField(m))) == 0.0);
}
