#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "driftlab/error.hpp"
#include "driftlab/hardy.hpp"

using namespace driftlab;

namespace {

constexpr double pi = std::numbers::pi;

double bump(const Vec2& p, const Vec2& c, double s) { return std::exp(-(p - c).squaredNorm() / (s * s)); }

GridField dipole(const PeriodicGrid& g) {
  return sample_grid(g, [](const Vec2& p) { return bump(p, Vec2(0.3, 0.1), 0.3) - bump(p, Vec2(-0.3, -0.1), 0.3); });
}

double max_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

// Direct evaluation of the inverse DFT of the multiplied forward DFT.
GridField riesz_oracle(const GridField& f, int j) {
  using C = std::complex<double>;
  const int n = f.grid.N;
  std::vector<C> hat(static_cast<std::size_t>(n) * n);
  for (int ky = 0; ky < n; ++ky)
    for (int kx = 0; kx < n; ++kx) {
      C s = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) s += f(x, y) * std::polar(1.0, -2 * pi * (kx * x + ky * y) / n);
      const int mx = kx < n / 2 ? kx : kx - n, my = ky < n / 2 ? ky : ky - n;
      const int kj = j == 1 ? kx : ky, mj = j == 1 ? mx : my;
      if ((mx == 0 && my == 0) || kj == n / 2)
        s = 0.0;
      else
        s *= C(0.0, -mj / std::sqrt(double(mx * mx + my * my)));
      hat[static_cast<std::size_t>(ky) * n + kx] = s;
    }
  GridField out(f.grid);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      C s = 0.0;
      for (int ky = 0; ky < n; ++ky)
        for (int kx = 0; kx < n; ++kx)
          s += hat[static_cast<std::size_t>(ky) * n + kx] * std::polar(1.0, 2 * pi * (kx * x + ky * y) / n);
      out(x, y) = s.real() / (n * n);
    }
  return out;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PeriodicGrid({4.0, 100}).validate(), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid({1.0, 64}).validate(), ConfigError);
  CHECK_NOTHROW(PeriodicGrid({2.0, 64}).validate());
  PeriodicGrid g{4.0, 8};
  CHECK(g.coord(0) == doctest::Approx(-3.5));
  CHECK(g.coord(7) == doctest::Approx(3.5));
}

TEST_CASE("Riesz transform matches the direct DFT") {
  PeriodicGrid g{2.0, 32};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  GridField f(g);
  for (double& v : f.data) v = u(rng);
  for (int j : {1, 2}) {
    const GridField fast = riesz_transform(f, j), slow = riesz_oracle(f, j);
    double err = 0.0;
    for (std::size_t k = 0; k < f.data.size(); ++k) err = std::max(err, std::abs(fast.data[k] - slow.data[k]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("Riesz identities") {
  PeriodicGrid g{4.0, 128};
  GridField zero(g);
  CHECK(max_abs(riesz_transform(zero, 1)) == 0.0);

  const GridField f = dipole(g);
  const GridField r1 = riesz_transform(riesz_transform(f, 1), 1);
  const GridField r2 = riesz_transform(riesz_transform(f, 2), 2);
  double err = 0.0;
  for (std::size_t k = 0; k < f.data.size(); ++k) err = std::max(err, std::abs(r1.data[k] + r2.data[k] + f.data[k]));
  CHECK(err <= 1e-10 * max_abs(f));

  // Parseval: the multiplier has modulus at most one
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  GridField noise(g);
  for (double& v : noise.data) v = u(rng);
  auto l2 = [](const GridField& h) {
    double s = 0.0;
    for (double v : h.data) s += v * v;
    return std::sqrt(s);
  };
  for (int j : {1, 2}) CHECK(l2(riesz_transform(noise, j)) <= l2(noise) * (1 + 1e-10));
  CHECK_THROWS_AS(riesz_transform(f, 3), DomainError);
}

TEST_CASE("Hardy norm") {
  PeriodicGrid g{4.0, 128};
  const auto zero = hardy_norm(GridField(g));
  CHECK(zero.total == 0.0);
  CHECK(zero.mean == 0.0);

  const GridField f = dipole(g);
  const auto r = hardy_norm(f);
  CHECK(r.total == r.l1 + r.riesz_l1[0] + r.riesz_l1[1]);
  CHECK(std::abs(r.mean) < 1e-12);
  GridField scaled = f;
  for (double& v : scaled.data) v *= -2.5;
  CHECK(hardy_norm(scaled).total == doctest::Approx(2.5 * r.total).epsilon(1e-12));

  const auto fine = hardy_norm(dipole({4.0, 256}));
  MESSAGE("dipole total " << r.total << " -> " << fine.total);
  CHECK(std::abs(fine.total - r.total) <= 0.05 * r.total);
}

TEST_CASE("a bump with nonzero mean is not in the Hardy space") {
  // Far from its support R_j f ~ (mass / 2 pi) x_j / |x|^3, whose L1 norm over
  // the annulus L < |x| < 2L is (2 ln 2 / pi) * mass for each j.
  auto single = [](const PeriodicGrid& g) { return sample_grid(g, [](const Vec2& p) { return bump(p, Vec2::Zero(), 0.3); }); };
  const double mass = pi * 0.09;
  const double increment = 2 * std::log(2.0) / pi * mass;
  const double h = 1.0 / 16.0;  // fixed spacing, doubling the box
  std::vector<HardyReport> reps;
  for (double L : {2.0, 4.0, 8.0, 16.0}) reps.push_back(hardy_norm(single({L, static_cast<int>(2 * L / h)})));
  for (std::size_t k = 1; k < reps.size(); ++k) {
    CAPTURE(k);
    MESSAGE("total " << reps[k - 1].total << " -> " << reps[k].total);
    CHECK(reps[k].mean == doctest::Approx(mass).epsilon(1e-6));
    for (int j = 0; j < 2; ++j)
      CHECK(reps[k].riesz_l1[j] - reps[k - 1].riesz_l1[j] == doctest::Approx(increment).epsilon(0.05));
    CHECK(reps[k].total - reps[k - 1].total == doctest::Approx(2 * increment).epsilon(0.05));
  }
}

TEST_CASE("mesh Jacobians") {
  auto m = build_disk_mesh(3);
  auto x = interpolate(m, [](const Vec2& p) { return p.x(); });
  auto y = interpolate(m, [](const Vec2& p) { return p.y(); });
  auto w = interpolate(m, [](const Vec2& p) { return std::sin(p.x() + 2 * p.y()); });
  const CellScalars jxy = jacobian(x, y);
  CHECK((jxy.array() + 1.0).abs().maxCoeff() < 1e-13);
  CHECK(jacobian(w, w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((jacobian(w, x) + jacobian(x, w)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CLMS ratio") {
  PeriodicGrid g{4.0, 128};
  auto cutoff = [](const Vec2& p) { return std::exp(-p.squaredNorm() * p.squaredNorm()); };
  auto u = sample_grid(g, [&](const Vec2& p) { return p.x() * cutoff(p); });
  auto v = sample_grid(g, [&](const Vec2& p) { return p.y() * cutoff(p); });
  const double base = clms_check(u, v);
  MESSAGE("CLMS baseline ratio for x, y with cutoff " << base);
  CHECK(std::isfinite(base));
  CHECK(base > 0.0);
  CHECK(std::abs(hardy_norm(jacobian(u, v)).mean) < 1e-10);

  GridField u3 = u;
  for (double& val : u3.data) val = 3 * val + 7;
  CHECK(clms_check(u3, v) == doctest::Approx(base).epsilon(1e-10));
  CHECK(clms_check(u, u) == 0.0);
  CHECK_THROWS_AS(clms_check(GridField(g), v), DomainError);

  auto m = build_disk_mesh(3);
  auto a = interpolate(m, [](const Vec2& p) { return p.x() * p.y(); });
  auto c = interpolate(m, [](const Vec2& p) { return std::cos(p.x()); });
  const double mesh_ratio = clms_check(a, c, g);
  CHECK(std::isfinite(mesh_ratio));
  CHECK(clms_check(nodal_map(a, [](double s) { return s + 4.0; }), c, g) == doctest::Approx(mesh_ratio).epsilon(1e-12));
  CHECK(clms_check(a, a, g) == 0.0);
  CHECK_THROWS_AS(clms_check(ScalarField(m), c, g), DomainError);
}

TEST_CASE("divergence surrogate") {
  auto m = build_disk_mesh(3);
  PeriodicGrid g{4.0, 128};
  CHECK(divergence_hardy(CellVectorField(m), g).total == 0.0);
  // a stream function vanishing on the circle keeps the zero extension divergence-free
  auto rot = perp(gradient(interpolate(m, [](const Vec2& p) { return (1 - p.squaredNorm()) * std::sin(3 * p.x()); })));
  auto rad = sample_cells(m, [](const Vec2& p) { return p; });
  const double t_rot = divergence_hardy(rot, g).total, t_rad = divergence_hardy(rad, g).total;
  MESSAGE("divergence surrogate rot " << t_rot << " radial " << t_rad);
  CHECK(t_rot < 1e-10 * t_rad);
}

TEST_CASE("Wente solve") {
  auto m = build_disk_mesh(4);
  auto x = interpolate(m, [](const Vec2& p) { return p.x(); });
  auto y = interpolate(m, [](const Vec2& p) { return p.y(); });
  auto r = wente_solve(x, y, WenteBoundary::DirichletZero);
  CHECK(r.w.values().maxCoeff() == doctest::Approx(0.25).epsilon(0.02 / 0.25));
  CHECK(l2_error(r.w, [](const Vec2& p) { return 0.25 * (1 - p.squaredNorm()); }) < m->h() * m->h());
  MESSAGE("ratio_inf " << r.ratio_inf);
  CHECK(r.ratio_inf == doctest::Approx(0.25 / pi).epsilon(0.02));

  auto n = wente_solve(x, y, WenteBoundary::NeumannMeanZero);
  CHECK(n.defect == doctest::Approx(-m->total_area()));
  CHECK(n.w.values().cwiseAbs().maxCoeff() < 1e-10);

  ScalarField c(m, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m->num_vertices()), 2.0));
  auto z = wente_solve(c, y, WenteBoundary::DirichletZero);
  CHECK(z.w.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.ratio_inf == 0.0);
  CHECK(z.ratio_grad == 0.0);
}

TEST_CASE("randomized Wente ratios are stable under refinement") {
  std::vector<double> worst;
  for (int level : {3, 4}) {
    auto m = build_disk_mesh(level);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1, 1);
    double mx = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      double a[6];
      for (double& v : a) v = u(rng);
      auto fu = interpolate(m, [&](const Vec2& p) { return std::sin(a[0] * 3 * p.x() + a[1] * 3 * p.y() + a[2]); });
      auto fv = interpolate(m, [&](const Vec2& p) { return std::cos(a[3] * 3 * p.x() - a[4] * 3 * p.y() + a[5]); });
      mx = std::max(mx, wente_solve(fu, fv, WenteBoundary::DirichletZero).ratio_inf);
    }
    worst.push_back(mx);
  }
  MESSAGE("max ratio_inf " << worst[0] << " -> " << worst[1]);
  CHECK(std::abs(worst[1] - worst[0]) <= 0.1 * worst[0]);
}
