#include "driftlab/hardy.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

using Complex = std::complex<double>;

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

fftw_complex* as_fftw(std::vector<Complex>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

void fft2(std::vector<Complex>& data, int n, int sign) {
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_2d(n, n, as_fftw(data), as_fftw(data), sign, FFTW_ESTIMATE));
  }
  if (!plan) throw Error("FFTW plan creation failed");
  fftw_execute(plan.get());
}

int signed_index(int k, int n) { return k < n / 2 ? k : k - n; }

double l1(const GridField& f) {
  double s = 0.0;
  for (double v : f.data) s += std::abs(v);
  return s * f.grid.cell_area();
}

}  // namespace

void PeriodicGrid::validate() const {
  if (N < 2 || (N & (N - 1)) != 0) throw ConfigError("grid size N must be a power of two");
  if (!(L >= 2.0)) throw ConfigError("grid half-width L must be at least 2");
}

GridField::GridField(const PeriodicGrid& g) : grid(g) {
  grid.validate();
  data.assign(static_cast<std::size_t>(g.N) * g.N, 0.0);
}

GridField::GridField(const PeriodicGrid& g, std::vector<double> values) : grid(g), data(std::move(values)) {
  grid.validate();
  if (data.size() != static_cast<std::size_t>(g.N) * g.N) throw DomainError("grid data has the wrong size");
}

GridField sample_grid(const PeriodicGrid& g, const std::function<double(const Vec2&)>& f) {
  GridField out(g);
  for (int iy = 0; iy < g.N; ++iy)
    for (int ix = 0; ix < g.N; ++ix) out(ix, iy) = f(Vec2(g.coord(ix), g.coord(iy)));
  return out;
}

GridField rasterize(const ScalarField& f, const PeriodicGrid& g) {
  GridField out(g);
  const TriMesh& mesh = f.mesh();
  for (int iy = 0; iy < g.N; ++iy)
    for (int ix = 0; ix < g.N; ++ix) {
      const Vec2 p(g.coord(ix), g.coord(iy));
      if (p.squaredNorm() > 1.0) continue;
      if (const auto loc = mesh.locate(p)) {
        const auto& tri = mesh.triangles()[loc->cell];
        out(ix, iy) = loc->bary[0] * f[tri[0]] + loc->bary[1] * f[tri[1]] + loc->bary[2] * f[tri[2]];
      }
    }
  return out;
}

GridField rasterize(const TriMesh& mesh, const CellScalars& c, const PeriodicGrid& g) {
  if (static_cast<std::size_t>(c.size()) != mesh.num_triangles()) throw DomainError("cell values have the wrong size");
  GridField out(g);
  for (int iy = 0; iy < g.N; ++iy)
    for (int ix = 0; ix < g.N; ++ix) {
      const Vec2 p(g.coord(ix), g.coord(iy));
      if (p.squaredNorm() > 1.0) continue;
      if (const auto loc = mesh.locate(p)) out(ix, iy) = c[loc->cell];
    }
  return out;
}

GridField riesz_transform(const GridField& f, int j) {
  if (j != 1 && j != 2) throw DomainError("Riesz transform index must be 1 or 2");
  const int n = f.grid.N;
  std::vector<Complex> buf(f.data.begin(), f.data.end());
  fft2(buf, n, FFTW_FORWARD);
  // buf[ky * n + kx] holds the coefficient of frequency (kx, ky)
  for (int ky = 0; ky < n; ++ky)
    for (int kx = 0; kx < n; ++kx) {
      const int mx = signed_index(kx, n), my = signed_index(ky, n);
      const int mj = j == 1 ? mx : my;
      const bool nyquist = (j == 1 ? kx : ky) == n / 2;
      Complex& c = buf[static_cast<std::size_t>(ky) * n + kx];
      if ((mx == 0 && my == 0) || nyquist) {
        c = 0.0;
        continue;
      }
      c *= Complex(0.0, -mj / std::hypot(static_cast<double>(mx), static_cast<double>(my)));
    }
  fft2(buf, n, FFTW_BACKWARD);

  GridField out(f.grid);
  double imag = 0.0, norm = 0.0;
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (std::size_t k = 0; k < buf.size(); ++k) {
    out.data[k] = buf[k].real() * scale;
    imag = std::max(imag, std::abs(buf[k].imag() * scale));
    norm = std::max(norm, std::abs(f.data[k]));
  }
  if (imag > 1e-10 * norm) throw Error("Riesz transform left an imaginary residue");
  return out;
}

HardyReport hardy_norm(const GridField& f) {
  HardyReport r;
  r.grid = f.grid;
  r.l1 = l1(f);
  r.riesz_l1 = {l1(riesz_transform(f, 1)), l1(riesz_transform(f, 2))};
  r.total = r.l1 + r.riesz_l1[0] + r.riesz_l1[1];
  double s = 0.0;
  for (double v : f.data) s += v;
  r.mean = s * f.grid.cell_area();
  return r;
}

CellScalars jacobian(const ScalarField& u, const ScalarField& v) {
  const CellVectorField gu = gradient(u), gv = gradient(v);
  CellScalars j(static_cast<Eigen::Index>(gu.values().size()));
  for (std::size_t t = 0; t < gu.values().size(); ++t) j[static_cast<Eigen::Index>(t)] = gu[t].dot(perp(gv[t]));
  return j;
}

GridField jacobian(const GridField& u, const GridField& v) {
  const int n = u.grid.N;
  if (v.grid.N != n || v.grid.L != u.grid.L) throw DomainError("grid fields live on different grids");
  const double h2 = 2.0 * u.grid.spacing();
  GridField out(u.grid);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int xp = (ix + 1) % n, xm = (ix + n - 1) % n, yp = (iy + 1) % n, ym = (iy + n - 1) % n;
      const double ux = (u(xp, iy) - u(xm, iy)) / h2, uy = (u(ix, yp) - u(ix, ym)) / h2;
      const double vx = (v(xp, iy) - v(xm, iy)) / h2, vy = (v(ix, yp) - v(ix, ym)) / h2;
      out(ix, iy) = -ux * vy + uy * vx;
    }
  return out;
}

GridField divergence_grid(const CellVectorField& b, const PeriodicGrid& g) {
  const Eigen::VectorXd density = weak_divergence(b).cwiseQuotient(lumped_mass(b.mesh()));
  return rasterize(ScalarField(b.mesh_ptr(), density), g);
}

HardyReport divergence_hardy(const CellVectorField& b, const PeriodicGrid& g) {
  return hardy_norm(divergence_grid(b, g));
}

double clms_check(const ScalarField& u, const ScalarField& v, const PeriodicGrid& g) {
  const double du = norms(u).h1_semi, dv = norms(v).h1_semi;
  if (du == 0.0 || dv == 0.0) throw DomainError("CLMS ratio needs nonzero gradients");
  return hardy_norm(rasterize(u.mesh(), jacobian(u, v), g)).total / (du * dv);
}

double clms_check(const GridField& u, const GridField& v) {
  const int n = u.grid.N;
  const double h2 = 2.0 * u.grid.spacing();
  double su = 0.0, sv = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int xp = (ix + 1) % n, xm = (ix + n - 1) % n, yp = (iy + 1) % n, ym = (iy + n - 1) % n;
      su += std::pow((u(xp, iy) - u(xm, iy)) / h2, 2) + std::pow((u(ix, yp) - u(ix, ym)) / h2, 2);
      sv += std::pow((v(xp, iy) - v(xm, iy)) / h2, 2) + std::pow((v(ix, yp) - v(ix, ym)) / h2, 2);
    }
  const double du = std::sqrt(su * u.grid.cell_area()), dv = std::sqrt(sv * u.grid.cell_area());
  if (du == 0.0 || dv == 0.0) throw DomainError("CLMS ratio needs nonzero gradients");
  return hardy_norm(jacobian(u, v)).total / (du * dv);
}

WenteResult wente_solve(const ScalarField& u, const ScalarField& v, WenteBoundary bc, const SolverOptions& opts) {
  const MeshPtr& mesh = u.mesh_ptr();
  // -Laplace(w) = -J
  DualVector rhs = -cell_load(*mesh, jacobian(u, v));
  double defect = 0.0;
  ScalarField w(mesh);
  if (bc == WenteBoundary::DirichletZero) {
    const auto nb = static_cast<Eigen::Index>(mesh->boundary_vertices().size());
    w = solve_dirichlet(mesh, rhs, BoundaryValues::Zero(nb), opts);
  } else {
    defect = -rhs.sum();
    const Eigen::VectorXd m = lumped_mass(*mesh);
    NeumannOptions no;
    no.solver = opts;
    no.scale_hint = rhs.lpNorm<1>();
    rhs += (defect / m.sum()) * m;
    const auto ne = static_cast<Eigen::Index>(mesh->boundary_edges().size());
    w = solve_neumann(mesh, rhs, EdgeValues::Zero(ne), no).w;
  }
  const double denom = norms(u).h1_semi * norms(v).h1_semi;
  const Norms nw = norms(w);
  WenteResult r{w, 0.0, 0.0, defect};
  if (denom > 0.0) {
    r.ratio_inf = nw.linf / denom;
    r.ratio_grad = nw.h1_semi / denom;
  }
  return r;
}

}  // namespace driftlab
