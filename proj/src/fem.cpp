#include "driftlab/fem.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& trips) {
  // setFromTriplets sums duplicates in insertion order, so a fixed triangle
  // order gives bit-identical matrices.
  SparseMatrix m(idx(n), idx(n));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Degree-5 Dunavant rule on the reference triangle (barycentric, weights sum to 1).
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

const std::array<QuadPoint, 7>& quad7() {
  static const std::array<QuadPoint, 7> rule = [] {
    constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    return std::array<QuadPoint, 7>{{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
                                     {{a1, b1, b1}, w1},
                                     {{b1, a1, b1}, w1},
                                     {{b1, b1, a1}, w1},
                                     {{a2, b2, b2}, w2},
                                     {{b2, a2, b2}, w2},
                                     {{b2, b2, a2}, w2}}};
  }();
  return rule;
}

int default_max_iter(const SolverOptions& opts, Eigen::Index n) {
  return opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n);
}

double threshold(const SolverOptions& opts, double bnorm, double r0norm) {
  const double base = bnorm > 0.0 ? bnorm : r0norm;
  return std::max(opts.rtol * base, opts.atol);
}

}  // namespace

// ---- assembly --------------------------------------------------------------

SparseMatrix assemble_stiffness(const TriMesh& mesh, std::span<const double> coeff) {
  if (!coeff.empty() && coeff.size() != mesh.num_triangles())
    throw DomainError("stiffness coefficient must have one value per triangle");
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double c = coeff.empty() ? 1.0 : coeff[t];
    if (!(c > 0.0)) throw DomainError("stiffness coefficient must be strictly positive");
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(tri[a], tri[b],
                           c * mesh.basis_gradient(t, a).dot(mesh.basis_gradient(t, b)) * mesh.area(t));
  }
  return from_triplets(mesh.num_vertices(), trips);
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trips.emplace_back(tri[a], tri[b], mesh.area(t) * (a == b ? 2.0 : 1.0) / 12.0);
  }
  return from_triplets(mesh.num_vertices(), trips);
}

SparseMatrix assemble_drift(const CellVectorField& b) {
  const TriMesh& mesh = b.mesh();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c)
        trips.emplace_back(tri[a], tri[c], b[t].dot(mesh.basis_gradient(t, c)) * mesh.area(t) / 3.0);
  }
  return from_triplets(mesh.num_vertices(), trips);
}

SparseMatrix assemble_perp_coupling(const ScalarField& B) {
  const TriMesh& mesh = B.mesh();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double bbar = B.cell_mean(t);
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c)
        trips.emplace_back(tri[a], tri[c],
                           bbar * perp(mesh.basis_gradient(t, c)).dot(mesh.basis_gradient(t, a)) *
                               mesh.area(t));
  }
  return from_triplets(mesh.num_vertices(), trips);
}

SparseSystem dirichlet_system(const TriMesh& mesh, SparseMatrix matrix, DualVector rhs,
                              const BoundaryValues& g) {
  const auto& bv = mesh.boundary_vertices();
  if (static_cast<std::size_t>(g.size()) != bv.size())
    throw DomainError("boundary data must have one value per boundary vertex");
  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(idx(mesh.num_vertices()));
  for (std::size_t k = 0; k < bv.size(); ++k) lifted[bv[k]] = g[idx(k)];
  rhs -= matrix * lifted;
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
    const bool row_fixed = mesh.is_boundary(static_cast<std::size_t>(r));
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      if (row_fixed || mesh.is_boundary(static_cast<std::size_t>(it.col())))
        it.valueRef() = (it.col() == r) ? 1.0 : 0.0;
    }
  }
  DirichletConstraint c;
  for (std::size_t k = 0; k < bv.size(); ++k) {
    rhs[bv[k]] = g[idx(k)];
    c.vertices.push_back(bv[k]);
    c.values.push_back(g[idx(k)]);
  }
  return SparseSystem{std::move(matrix), std::move(rhs), std::move(c)};
}

// ---- differential operators -------------------------------------------------

CellVectorField gradient(const ScalarField& f) {
  const TriMesh& mesh = f.mesh();
  std::vector<Vec2> g(mesh.num_triangles());
  for (std::size_t t = 0; t < g.size(); ++t) {
    const auto& tri = mesh.triangles()[t];
    // differences against the first vertex make constants exact
    const double a = f[tri[0]];
    g[t] = (f[tri[1]] - a) * mesh.basis_gradient(t, 1) + (f[tri[2]] - a) * mesh.basis_gradient(t, 2);
  }
  return CellVectorField(f.mesh_ptr(), std::move(g));
}

CellVectorField perp(const CellVectorField& g) {
  std::vector<Vec2> v(g.values().size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = perp(g[t]);
  return CellVectorField(g.mesh_ptr(), std::move(v));
}

DualVector weak_divergence(const CellVectorField& g) {
  const TriMesh& mesh = g.mesh();
  DualVector l = DualVector::Zero(idx(mesh.num_vertices()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int k = 0; k < 3; ++k) l[tri[k]] -= g[t].dot(mesh.basis_gradient(t, k)) * mesh.area(t);
  }
  return l;
}

DualVector weak_curl(const CellVectorField& g) {
  return weak_divergence(perp(g)) - boundary_load(g.mesh(), tangential_trace(g));
}

EdgeValues tangential_trace(const CellVectorField& g) {
  const TriMesh& mesh = g.mesh();
  const auto geo = boundary_geometry(mesh);
  EdgeValues v(idx(mesh.boundary_edges().size()));
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e)
    v[idx(e)] = g[mesh.boundary_edges()[e].cell].dot(geo.tangent[e]);
  return v;
}

EdgeValues normal_trace(const CellVectorField& g) {
  const TriMesh& mesh = g.mesh();
  const auto geo = boundary_geometry(mesh);
  EdgeValues v(idx(mesh.boundary_edges().size()));
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e)
    v[idx(e)] = g[mesh.boundary_edges()[e].cell].dot(geo.normal[e]);
  return v;
}

CellScalars dot(const CellVectorField& a, const CellVectorField& b) {
  if (&a.mesh() != &b.mesh()) throw DomainError("fields live on different meshes");
  CellScalars c(idx(a.values().size()));
  for (std::size_t t = 0; t < a.values().size(); ++t) c[idx(t)] = a[t].dot(b[t]);
  return c;
}

DualVector boundary_load(const TriMesh& mesh, const EdgeValues& values) {
  const auto& be = mesh.boundary_edges();
  if (static_cast<std::size_t>(values.size()) != be.size())
    throw DomainError("edge data must have one value per boundary edge");
  DualVector l = DualVector::Zero(idx(mesh.num_vertices()));
  const auto& v = mesh.vertices();
  for (std::size_t e = 0; e < be.size(); ++e) {
    const double half = 0.5 * values[idx(e)] * (v[be[e].v[1]] - v[be[e].v[0]]).norm();
    l[be[e].v[0]] += half;
    l[be[e].v[1]] += half;
  }
  return l;
}

DualVector load_vector(const ScalarField& f) {
  const TriMesh& mesh = f.mesh();
  DualVector l = DualVector::Zero(idx(mesh.num_vertices()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double s = f[tri[0]] + f[tri[1]] + f[tri[2]];
    for (int k = 0; k < 3; ++k) l[tri[k]] += mesh.area(t) * (f[tri[k]] + s) / 12.0;
  }
  return l;
}

DualVector cell_load(const TriMesh& mesh, const CellScalars& c) {
  if (static_cast<std::size_t>(c.size()) != mesh.num_triangles())
    throw DomainError("cell data must have one value per triangle");
  DualVector l = DualVector::Zero(idx(mesh.num_vertices()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (int k : mesh.triangles()[t]) l[k] += c[idx(t)] * mesh.area(t) / 3.0;
  return l;
}

Eigen::VectorXd lumped_mass(const TriMesh& mesh) {
  return cell_load(mesh, CellScalars::Ones(idx(mesh.num_triangles())));
}

// ---- Krylov solvers -----------------------------------------------------------

SolveStats pcg(const LinearOperator& apply, const Eigen::VectorXd& diag, const Eigen::VectorXd& b,
               Eigen::VectorXd& x, const SolverOptions& opts) {
  const Eigen::Index n = b.size();
  const int max_iter = default_max_iter(opts, n);
  Eigen::VectorXd ax(n), r(n), z(n), p(n), ap(n);
  apply(x, ax);
  r = b - ax;
  const double thr = threshold(opts, b.norm(), r.norm());
  SolveStats st;
  st.residual = r.norm();
  if (st.residual <= thr) {
    st.converged = true;
    return st;
  }
  z = r.cwiseQuotient(diag);
  p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    st.iterations = it;
    st.residual = r.norm();
    if (st.residual <= thr) {
      st.converged = true;
      return st;
    }
    z = r.cwiseQuotient(diag);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return st;
}

SolveStats bicgstab(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const SolverOptions& opts) {
  const Eigen::Index n = b.size();
  const int max_iter = default_max_iter(opts, n);
  const Eigen::VectorXd dinv = a.diagonal().cwiseInverse();
  Eigen::VectorXd r = b - a * x;
  const double thr = threshold(opts, b.norm(), r.norm());
  SolveStats st;
  st.residual = r.norm();
  if (st.residual <= thr) {
    st.converged = true;
    return st;
  }
  Eigen::VectorXd rhat = r, v = Eigen::VectorXd::Zero(n), p = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y(n), s(n), zz(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int restarts = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = rhat.dot(r);
    if (std::abs(rho_new) < 1e-300 || omega == 0.0) {
      // breakdown: restart the shadow residual
      if (++restarts > 5) break;
      rhat = r;
      rho = alpha = omega = 1.0;
      v.setZero();
      p.setZero();
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    y = dinv.cwiseProduct(p);
    v = a * y;
    alpha = rho_new / rhat.dot(v);
    s = r - alpha * v;
    st.iterations = it;
    if (s.norm() <= thr) {
      x += alpha * y;
      st.residual = (b - a * x).norm();
      st.converged = st.residual <= 10.0 * thr;
      if (st.converged) return st;
      r = b - a * x;
      continue;
    }
    zz = dinv.cwiseProduct(s);
    t = a * zz;
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    x += alpha * y + omega * zz;
    r = s - omega * t;
    rho = rho_new;
    st.residual = r.norm();
    if (st.residual <= thr) {
      st.converged = true;
      return st;
    }
  }
  st.residual = (b - a * x).norm();
  st.converged = st.residual <= thr;
  return st;
}

Eigen::VectorXd solve_system(const SparseSystem& sys, bool symmetric, const SolverOptions& opts,
                             const Eigen::VectorXd* initial_guess) {
  const Eigen::Index n = sys.rhs.size();
  Eigen::VectorXd x = initial_guess ? *initial_guess : Eigen::VectorXd::Zero(n);
  if (const auto* d = std::get_if<DirichletConstraint>(&sys.constraint))
    for (std::size_t k = 0; k < d->vertices.size(); ++k) x[d->vertices[k]] = d->values[k];
  SolveStats st;
  if (symmetric) {
    const Eigen::VectorXd diag = sys.matrix.diagonal();
    st = pcg([&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = sys.matrix * in; },
             diag, sys.rhs, x, opts);
  } else {
    st = bicgstab(sys.matrix, sys.rhs, x, opts);
  }
  if (!st.converged)
    throw SolverError(std::string(symmetric ? "CG" : "BiCGSTAB") + " did not converge in " +
                          std::to_string(st.iterations) + " iterations",
                      st.residual, st.iterations);
  return x;
}

ScalarField solve_dirichlet(const MeshPtr& mesh, const DualVector& rhs, const BoundaryValues& g,
                            const SolverOptions& opts) {
  if (rhs.size() != idx(mesh->num_vertices())) throw DomainError("rhs size does not match mesh");
  if (!rhs.allFinite()) throw DomainError("rhs has non-finite entries");
  auto sys = dirichlet_system(*mesh, assemble_stiffness(*mesh), rhs, g);
  return ScalarField(mesh, solve_system(sys, true, opts));
}

NeumannSolution solve_neumann(const MeshPtr& mesh, const DualVector& rhs, const EdgeValues& flux,
                              const NeumannOptions& opts) {
  if (rhs.size() != idx(mesh->num_vertices())) throw DomainError("rhs size does not match mesh");
  DualVector f = rhs + boundary_load(*mesh, flux);
  const double defect = f.sum();
  double scale = rhs.lpNorm<1>() + opts.scale_hint;
  for (std::size_t e = 0; e < mesh->boundary_edges().size(); ++e) {
    const auto& be = mesh->boundary_edges()[e];
    scale += std::abs(flux[idx(e)]) * (mesh->vertices()[be.v[1]] - mesh->vertices()[be.v[0]]).norm();
  }
  if (std::abs(defect) > opts.compat_tol * scale)
    throw CompatibilityError("Neumann data incompatible: defect " + std::to_string(defect), defect);

  const Eigen::VectorXd m = lumped_mass(*mesh);
  const double area = m.sum();
  f -= (defect / area) * m;

  // K + alpha m m^T is SPD; with sum(f) = 0 its solution satisfies m.w = 0.
  const SparseMatrix k = assemble_stiffness(*mesh);
  const Eigen::VectorXd kdiag = k.diagonal();
  const double alpha = kdiag.mean() * static_cast<double>(m.size()) / (area * area);
  const Eigen::VectorXd diag = kdiag + alpha * m.cwiseProduct(m);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m.size());
  const auto st = pcg(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        out.noalias() = k * in;
        out += (alpha * m.dot(in)) * m;
      },
      diag, f, w, opts.solver);
  if (!st.converged)
    throw SolverError("CG did not converge for Neumann problem in " + std::to_string(st.iterations) +
                          " iterations",
                      st.residual, st.iterations);
  w.array() -= m.dot(w) / area;
  return NeumannSolution{ScalarField(mesh, std::move(w)), defect};
}

// ---- norms ------------------------------------------------------------------

Norms norms(const ScalarField& f) {
  const TriMesh& mesh = f.mesh();
  Norms n;
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double a = f[tri[0]], b = f[tri[1]], c = f[tri[2]];
    l2 += mesh.area(t) / 12.0 * (a * a + b * b + c * c + (a + b + c) * (a + b + c));
    const Vec2 g = a * mesh.basis_gradient(t, 0) + b * mesh.basis_gradient(t, 1) + c * mesh.basis_gradient(t, 2);
    h1 += g.squaredNorm() * mesh.area(t);
  }
  n.l2 = std::sqrt(std::max(l2, 0.0));
  n.h1_semi = std::sqrt(h1);
  n.linf = f.values().size() ? f.values().cwiseAbs().maxCoeff() : 0.0;
  return n;
}

Norms norms(const CellVectorField& g) {
  const TriMesh& mesh = g.mesh();
  Norms n;
  double l2 = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    l2 += g[t].squaredNorm() * mesh.area(t);
    n.linf = std::max(n.linf, g[t].norm());
  }
  n.l2 = std::sqrt(l2);
  return n;
}

double integral(const ScalarField& f) { return lumped_mass(f.mesh()).dot(f.values()); }

double mean(const ScalarField& f) { return integral(f) / f.mesh().total_area(); }

double boundary_integral(const TriMesh& mesh, const EdgeValues& values) {
  return boundary_load(mesh, values).sum();
}

double l2_norm_in_ball(const CellVectorField& g, const Vec2& x0, double r) {
  const TriMesh& mesh = g.mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    if ((mesh.centroid(t) - x0).norm() <= r) s += g[t].squaredNorm() * mesh.area(t);
  return std::sqrt(s);
}

double l2_error(const ScalarField& f, const std::function<double(const Vec2&)>& exact) {
  const TriMesh& mesh = f.mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (const auto& q : quad7()) {
      Vec2 x = Vec2::Zero();
      double fh = 0.0;
      for (int k = 0; k < 3; ++k) {
        x += q.bary[k] * mesh.vertices()[tri[k]];
        fh += q.bary[k] * f[tri[k]];
      }
      const double d = fh - exact(x);
      s += q.weight * mesh.area(t) * d * d;
    }
  }
  return std::sqrt(s);
}

double h1_error(const ScalarField& f, const std::function<Vec2(const Vec2&)>& exact_grad) {
  const TriMesh& mesh = f.mesh();
  const auto grad = gradient(f);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (const auto& q : quad7()) {
      Vec2 x = Vec2::Zero();
      for (int k = 0; k < 3; ++k) x += q.bary[k] * mesh.vertices()[tri[k]];
      s += q.weight * mesh.area(t) * (grad[t] - exact_grad(x)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

}  // namespace driftlab
