#include "driftlab/driftsolve.hpp"

#include <random>
#include <vector>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

DualVector source_or_zero(const TriMesh& mesh, const std::optional<DualVector>& f) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  if (!f) return DualVector::Zero(n);
  if (f->size() != n) throw DomainError("source has the wrong size");
  if (!f->allFinite()) throw DomainError("source has non-finite entries");
  return *f;
}

void check_ball(const Vec2& x0, double r) {
  if (!(r > 0.0) || x0.norm() + r > 1.0 + 1e-12)
    throw DomainError("rescaling ball must have positive radius and lie in the unit disk");
}

SparseSystem conservation_system(const ScalarField& A, const ScalarField& B, const BoundaryValues& g,
                                 const DualVector& rhs) {
  const TriMesh& mesh = A.mesh();
  if (&B.mesh() != &mesh) throw DomainError("A and B live on different meshes");
  if (A.values().minCoeff() <= 0.0) throw DomainError("A must be strictly positive");
  std::vector<double> abar(mesh.num_triangles());
  for (std::size_t t = 0; t < abar.size(); ++t) abar[t] = A.cell_mean(t);
  SparseMatrix m = assemble_stiffness(mesh, abar) - assemble_perp_coupling(B);
  return dirichlet_system(mesh, std::move(m), rhs, g);
}

}  // namespace

ScalarField solve_drift(const DriftProblem& prob, const SolverOptions& opts) {
  const MeshPtr& mesh = prob.b.mesh_ptr();
  const DualVector f = source_or_zero(*mesh, prob.f);
  SparseMatrix m = assemble_stiffness(*mesh) - assemble_drift(prob.b);
  auto sys = dirichlet_system(*mesh, std::move(m), -f, prob.g);
  return ScalarField(mesh, solve_system(sys, false, opts));
}

ScalarField solve_conservation(const ScalarField& A, const ScalarField& B, const BoundaryValues& g,
                               const std::optional<DualVector>& f, const SolverOptions& opts) {
  const DualVector rhs = -A.values().cwiseProduct(source_or_zero(A.mesh(), f));
  auto sys = conservation_system(A, B, g, rhs);
  return ScalarField(A.mesh_ptr(), solve_system(sys, false, opts));
}

double weighted_energy(const ScalarField& A, const ScalarField& v) {
  const TriMesh& mesh = A.mesh();
  const CellVectorField gv = gradient(v);
  double e = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) e += A.cell_mean(t) * gv[t].squaredNorm() * mesh.area(t);
  return e;
}

UniquenessReport uniqueness_energy(const ScalarField& A, const ScalarField& B, std::optional<std::uint64_t> seed) {
  const TriMesh& mesh = A.mesh();
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  const auto nb = static_cast<Eigen::Index>(mesh.boundary_vertices().size());
  auto sys = conservation_system(A, B, BoundaryValues::Zero(nb), DualVector::Zero(n));

  Eigen::VectorXd guess = Eigen::VectorXd::Zero(n);
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) guess[i] = u(rng);
  }
  SolverOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-12;
  Eigen::VectorXd x = guess;
  for (const int v : std::get<DirichletConstraint>(sys.constraint).vertices) x[v] = 0.0;
  const SolveStats st = bicgstab(sys.matrix, sys.rhs, x, opts);
  if (!st.converged) throw SolverError("homogeneous solve did not converge", st.residual, st.iterations);
  ScalarField v(A.mesh_ptr(), std::move(x));
  const double e = weighted_energy(A, v);
  return UniquenessReport{e, st.iterations, std::move(v)};
}

ScalarField rescale(const ScalarField& u, const Vec2& x0, double r, const MeshPtr& target) {
  check_ball(x0, r);
  Eigen::VectorXd v(static_cast<Eigen::Index>(target->num_vertices()));
  for (std::size_t i = 0; i < target->num_vertices(); ++i)
    v[static_cast<Eigen::Index>(i)] = u.evaluate(x0 + r * target->vertices()[i]);
  return ScalarField(target, std::move(v));
}

CellVectorField rescale(const CellVectorField& b, const Vec2& x0, double r, const MeshPtr& target) {
  check_ball(x0, r);
  const TriMesh& source = b.mesh();
  std::vector<Vec2> v(target->num_triangles());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = r * b[source.locate_nearest(x0 + r * target->centroid(t)).cell];
  return CellVectorField(target, std::move(v));
}

}  // namespace driftlab
