#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "driftlab/driftsolve.hpp"
#include "driftlab/error.hpp"
#include "driftlab/riviere.hpp"

using namespace driftlab;

namespace {

BoundaryValues zeros(const TriMesh& m) {
  return BoundaryValues::Zero(static_cast<Eigen::Index>(m.boundary_vertices().size()));
}

ScalarField constant(const MeshPtr& m, double c) {
  return ScalarField(m, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m->num_vertices()), c));
}

CellVectorField normalized(const CellVectorField& b, double target) { return (target / norms(b).l2) * b; }

CellVectorField mixed(const MeshPtr& m) {
  return sample_cells(m, [](const Vec2& p) { return Vec2(std::sin(2 * p.y()) + p.x(), p.x() * p.y() - 0.3); });
}

// cos(theta) plus random higher modes
std::function<double(const Vec2&)> boundary_function(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::array<double, 2>> c;
  for (int k = 2; k <= 4; ++k) c.push_back({0.5 * u(rng) / (k * k), 0.5 * u(rng) / (k * k)});
  return [c](const Vec2& p) {
    const double th = std::atan2(p.y(), p.x());
    double v = std::cos(th);
    for (std::size_t k = 0; k < c.size(); ++k)
      v += c[k][0] * std::cos((k + 2) * th) + c[k][1] * std::sin((k + 2) * th);
    return v;
  };
}

}  // namespace

TEST_CASE("drift solve basics") {
  auto m = build_disk_mesh(4);
  SUBCASE("zero drift gives harmonic extension") {
    auto u = solve_drift({CellVectorField(m), boundary_trace(*m, [](const Vec2& p) { return p.x(); }), {}});
    for (std::size_t i = 0; i < m->num_vertices(); ++i) CHECK(std::abs(u[i] - m->vertices()[i].x()) < 1e-8);
  }
  SUBCASE("constants solve the homogeneous equation for any drift") {
    auto b = sample_cells(m, [](const Vec2& p) { return Vec2(3 * p.y() * p.y(), -2 * p.x() + 1); });
    auto u = solve_drift({b, BoundaryValues::Ones(zeros(*m).size()), {}});
    CHECK((u.values().array() - 1.0).abs().maxCoeff() < 1e-8);
    SparseMatrix op = assemble_stiffness(*m) - assemble_drift(b);
    CHECK((op * Eigen::VectorXd::Ones(op.cols())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("manufactured drift solution") {
  double prev = 0.0;
  for (int level : {3, 4, 5}) {
    auto m = build_disk_mesh(level);
    auto b = sample_cells(m, [](const Vec2& p) { return p; });
    auto f = load_vector(interpolate(m, [](const Vec2& p) { return -4.0 - 2.0 * p.squaredNorm(); }));
    auto u = solve_drift({b, zeros(*m), f});
    const double err = l2_error(u, [](const Vec2& p) { return 1.0 - p.squaredNorm(); });
    CAPTURE(level);
    CHECK(err < m->h() * m->h());
    if (level > 3) {
      MESSAGE("level " << level << " L2 ratio " << prev / err);
      CHECK(prev / err > 3.0);
    }
    prev = err;
  }
}

TEST_CASE("maximum principle surrogate") {
  auto m = build_disk_mesh(3);
  auto g = boundary_trace(*m, [](const Vec2& p) { return 0.5 + 0.5 * std::sin(5 * std::atan2(p.y(), p.x())); });
  auto u = solve_drift({CellVectorField(m), g, {}});
  CHECK(u.values().minCoeff() >= -0.01);
  CHECK(u.values().maxCoeff() <= 1.01);
}

TEST_CASE("conservation form") {
  auto m = build_disk_mesh(3);
  auto g = boundary_trace(*m, boundary_function(3));
  SUBCASE("A = 1, B = 0 matches the drift-free solve") {
    auto uc = solve_conservation(constant(m, 1.0), ScalarField(m), g);
    auto ud = solve_drift({CellVectorField(m), g, {}});
    CHECK((uc.values() - ud.values()).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("constant B contributes nothing") {
    SparseMatrix s = assemble_perp_coupling(constant(m, 2.7));
    // interior rows vanish; boundary rows only see the boundary tangential derivative
    double interior = 0.0;
    for (Eigen::Index r = 0; r < s.outerSize(); ++r)
      if (!m->is_boundary(static_cast<std::size_t>(r)))
        for (SparseMatrix::InnerIterator it(s, r); it; ++it)
          if (!m->is_boundary(static_cast<std::size_t>(it.col()))) interior = std::max(interior, std::abs(it.value()));
    CHECK(interior <= 1e-12);
    auto u0 = solve_conservation(constant(m, 1.0), ScalarField(m), g);
    auto u1 = solve_conservation(constant(m, 1.0), constant(m, 2.7), g);
    CHECK((u0.values() - u1.values()).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("perp coupling is skew") {
    auto B = interpolate(m, [](const Vec2& p) { return std::sin(p.x()) + p.y(); });
    Eigen::MatrixXd s = Eigen::MatrixXd(assemble_perp_coupling(B));
    CHECK((s + s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("nonpositive A is rejected") {
    CHECK_THROWS_AS(solve_conservation(constant(m, -1.0), ScalarField(m), g), DomainError);
    CHECK_THROWS_AS(solve_conservation(constant(m, 0.0), ScalarField(m), g), DomainError);
  }
}

TEST_CASE("conservation and drift solutions agree") {
  std::vector<double> worst(2, 0.0);
  for (int li = 0; li < 2; ++li) {
    auto m = build_disk_mesh(4 + li);
    auto b = normalized(mixed(m), 0.05);
    auto parts = hodge_decompose(b);
    auto d = decompose(b, parts);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      auto g = boundary_trace(*m, boundary_function(seed));
      auto uc = solve_conservation(d.A, d.B, g);
      auto ud = solve_drift({b, g, {}});
      worst[li] = std::max(worst[li], norms(uc - ud).l2 / g.cwiseAbs().maxCoeff());
    }
  }
  MESSAGE("worst relative difference " << worst[0] << " -> " << worst[1]);
  CHECK(worst[0] <= 0.05);
  CHECK(worst[1] <= 0.625 * worst[0]);
}

TEST_CASE("uniqueness energy") {
  auto m = build_disk_mesh(4);
  auto b = normalized(mixed(m), 0.05);
  auto parts = hodge_decompose(b);
  auto d = decompose(b, parts);
  auto zero_start = uniqueness_energy(d.A, d.B);
  CHECK(zero_start.energy <= 1e-16);
  CHECK(zero_start.iterations == 0);
  auto random_start = uniqueness_energy(d.A, d.B, 42);
  MESSAGE("energy from random start " << random_start.energy);
  CHECK(random_start.energy <= 1e-16);
  CHECK(uniqueness_energy(constant(m, 1.0), ScalarField(m)).energy == 0.0);
  CHECK(weighted_energy(constant(m, 2.0), interpolate(m, [](const Vec2& p) { return p.x(); })) ==
        doctest::Approx(2 * m->total_area()));
}

TEST_CASE("rescaling") {
  auto m = build_disk_mesh(3);
  auto u = interpolate(m, [](const Vec2& p) { return std::exp(p.x()) * p.y(); });
  auto same = rescale(u, Vec2::Zero(), 1.0, m);
  CHECK((same.values() - u.values()).cwiseAbs().maxCoeff() <= 1e-12);

  auto x = interpolate(m, [](const Vec2& p) { return p.x(); });
  auto shifted = rescale(x, Vec2(0.3, 0.0), 0.2, m);
  for (std::size_t i = 0; i < m->num_vertices(); ++i)
    CHECK(shifted[i] == doctest::Approx(0.3 + 0.2 * m->vertices()[i].x()).epsilon(1e-12));

  auto fine = build_disk_mesh(5);
  CellVectorField one(fine, std::vector<Vec2>(fine->num_triangles(), Vec2(1.0, 0.0)));
  auto half = rescale(one, Vec2::Zero(), 0.5, fine);
  for (const auto& v : half.values()) CHECK(v.x() == 0.5);
  const double expected = 0.5 * std::sqrt(std::numbers::pi);
  CHECK(std::abs(norms(half).l2 - expected) <= fine->h());
  CHECK(std::abs(l2_norm_in_ball(one, Vec2::Zero(), 0.5) - expected) <= fine->h());

  CHECK_THROWS_AS(rescale(u, Vec2(0.5, 0.0), 0.6, m), DomainError);
  CHECK_THROWS_AS(rescale(u, Vec2::Zero(), 0.0, m), DomainError);
}
