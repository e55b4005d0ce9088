#include "driftlab/riviere.hpp"

#include <cmath>
#include <limits>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

ScalarField constant_field(const MeshPtr& mesh, double c) {
  return ScalarField(mesh, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh->num_vertices()), c));
}

// Cell mean of the nodal field times the edge-adjacent trace of g.tau, used
// as the normal trace of s * grad(xi) since dxi/dnu = b.tau.
EdgeValues weighted_edge_trace(const ScalarField& s, const EdgeValues& values) {
  const TriMesh& mesh = s.mesh();
  EdgeValues out(values.size());
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    const auto& be = mesh.boundary_edges()[e];
    const auto k = static_cast<Eigen::Index>(e);
    out[k] = 0.5 * (s[be.v[0]] + s[be.v[1]]) * values[k];
  }
  return out;
}

// Bound on |grad f| on cell t that does not benefit from cancellation, so
// it also bounds the rounding in the computed gradient.
double gradient_magnitude(const ScalarField& f, std::size_t t) {
  const auto& tri = f.mesh().triangles()[t];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::abs(f[tri[k]]) * f.mesh().basis_gradient(t, k).norm();
  return s;
}

// Size of the cell terms summed into the Neumann right-hand sides below.
double divergence_scale(const CellVectorField& g) {
  const TriMesh& mesh = g.mesh();
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double grad_sum = 0.0;
    for (int k = 0; k < 3; ++k) grad_sum += mesh.basis_gradient(t, k).norm();
    total += mesh.area(t) * g[t].norm() * grad_sum;
  }
  return total;
}

double jacobian_scale(const ScalarField& f, const ScalarField& g) {
  const TriMesh& mesh = f.mesh();
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    total += mesh.area(t) * gradient_magnitude(f, t) * gradient_magnitude(g, t);
  return total;
}

BoundsReport bounds_of(const ScalarField& A, const ScalarField& Atilde, const ScalarField& B) {
  BoundsReport r;
  r.A_inf = A.values().cwiseAbs().maxCoeff();
  r.Ainv_inf = A.values().minCoeff() > 0.0 ? A.values().cwiseInverse().maxCoeff()
                                           : std::numeric_limits<double>::infinity();
  r.Atilde_dev_inf = (Atilde.values().array() - 1.0).abs().maxCoeff();
  r.grad_Atilde_l2 = norms(Atilde).h1_semi;
  r.grad_B_l2 = norms(B).h1_semi;
  return r;
}

}  // namespace

ScalarField b0_solve(const HodgeParts& parts, const CellVectorField& b, const NeumannOptions& opts) {
  const MeshPtr& mesh = b.mesh_ptr();
  const CellVectorField g = scale_cells(parts.Pinv, gradient(parts.xi));
  const EdgeValues flux = tangential_trace(b);
  // int grad B0 . grad phi = int g . grad phi - int_boundary (g.nu - b.tau) phi
  const DualVector rhs = -weak_divergence(g) - boundary_load(*mesh, weighted_edge_trace(parts.Pinv, flux));
  NeumannOptions o = opts;
  o.scale_hint += divergence_scale(g);
  return solve_neumann(mesh, rhs, flux, o).w;
}

RiviereState fixed_point_step(const RiviereState& state, const HodgeParts& parts, const ScalarField& B0,
                              const NeumannOptions& opts) {
  const MeshPtr& mesh = state.Atilde.mesh_ptr();
  const std::size_t nt = mesh->num_triangles();

  // Work with Ahat - 1 and P^-1 - 1, which vanish exactly on the boundary, so
  // the Jacobian terms keep their zero boundary integral up to rounding.
  const ScalarField one = constant_field(mesh, 1.0);
  const ScalarField dev = state.Atilde - one;
  const ScalarField pinv_dev = parts.Pinv - one;
  const CellVectorField grad_dev = gradient(dev);
  const CellVectorField rot_xi = perp(gradient(parts.xi));
  const CellVectorField rot_B = perp(gradient(state.B));
  const CellVectorField grad_P = gradient(parts.P - one);
  const CellVectorField grad_Pinv = gradient(pinv_dev);

  // -Laplace(Atilde) = -(grad(Ahat - 1).perp(grad xi) - perp(grad Bhat).grad P)
  CellScalars sa(static_cast<Eigen::Index>(nt));
  CellScalars sb(static_cast<Eigen::Index>(nt));
  for (std::size_t t = 0; t < nt; ++t) {
    const auto k = static_cast<Eigen::Index>(t);
    sa[k] = -(grad_dev[t].dot(rot_xi[t]) - rot_B[t].dot(grad_P[t]));
    sb[k] = perp(grad_dev[t]).dot(grad_Pinv[t]);
  }
  const auto nb = static_cast<Eigen::Index>(mesh->boundary_vertices().size());
  ScalarField Atilde = solve_dirichlet(mesh, cell_load(*mesh, sa), BoundaryValues::Zero(nb), opts.solver) + one;

  // -Laplace(B - B0) = -div((Ahat - 1) P^-1 grad xi) - perp(grad Ahat).grad P^-1, zero flux
  const CellVectorField g = scale_cells(nodal_product(dev, parts.Pinv), gradient(parts.xi));
  const DualVector rhs = -weak_divergence(g) - cell_load(*mesh, sb);
  const auto ne = static_cast<Eigen::Index>(mesh->boundary_edges().size());
  NeumannOptions o = opts;
  o.scale_hint += divergence_scale(g) + jacobian_scale(dev, pinv_dev);
  ScalarField correction = solve_neumann(mesh, rhs, EdgeValues::Zero(ne), o).w;

  return RiviereState{std::move(Atilde), B0 + correction};
}

double decomposition_residual(const CellVectorField& b, const ScalarField& A, const ScalarField& B) {
  return norms(scale_cells(A, b) - gradient(A) - perp(gradient(B))).l2;
}

double step2_residual(const RiviereDecomp& decomp, const HodgeParts& parts) {
  const CellVectorField field = gradient(decomp.Atilde) - scale_cells(decomp.Atilde, perp(gradient(parts.xi))) +
                                scale_cells(parts.P, perp(gradient(decomp.B)));
  return norms(field).l2;
}

double contraction_ratio(const std::vector<double>& trace) {
  double ratio = 0.0;
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k - 1] > 0.0) ratio = std::max(ratio, trace[k] / trace[k - 1]);
  return ratio;
}

RiviereDecomp decompose(const CellVectorField& b, const HodgeParts& parts, const RiviereOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("fixed-point tolerance must be positive");
  if (opts.max_iter < 1) throw DomainError("fixed-point max_iter must be at least 1");
  const MeshPtr& mesh = b.mesh_ptr();

  const SmallnessReport small = smallness_report(parts, opts.epsilon);
  std::vector<std::string> warnings;
  if (!small.passed()) warnings.emplace_back("drift fails the smallness check; iterating anyway");

  ScalarField B0 = b0_solve(parts, b, opts.solver);
  RiviereState state{constant_field(mesh, 1.0), B0};
  std::vector<TraceEntry> trace;
  std::vector<double> diffs;
  bool converged = false;
  for (int k = 1; k <= opts.max_iter; ++k) {
    TraceEntry entry;
    try {
      RiviereState next = fixed_point_step(state, parts, B0, opts.solver);
      entry.dAtilde_inf = (next.Atilde.values() - state.Atilde.values()).cwiseAbs().maxCoeff();
      entry.dB_h1 = norms(next.B - state.B).h1_semi;
      entry.residual_ab = decomposition_residual(b, nodal_product(next.Atilde, parts.Pinv), next.B);
      state = std::move(next);
    } catch (const Error& e) {
      // a diverging iterate overflows or stalls the inner solves
      warnings.emplace_back(std::string("fixed-point step failed: ") + e.what());
      break;
    }
    const double diff = entry.dAtilde_inf + entry.dB_h1;
    trace.push_back(entry);
    diffs.push_back(diff);
    if (!std::isfinite(diff) || diff > 1e8 * (diffs.front() + 1.0)) break;
    if (diff < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("fixed point did not reach tolerance in " + std::to_string(diffs.size()) +
                               " iterations",
                           diffs);

  ScalarField A = nodal_product(state.Atilde, parts.Pinv);
  RiviereDecomp out{.A = A,
                    .B = state.B,
                    .Atilde = state.Atilde,
                    .B0 = std::move(B0),
                    .iterations = static_cast<int>(diffs.size()),
                    .contraction_trace = diffs,
                    .trace = std::move(trace),
                    .contraction_ratio = contraction_ratio(diffs),
                    .residual_ab = decomposition_residual(b, A, state.B),
                    .residual_step2 = 0.0,
                    .bounds = bounds_of(A, state.Atilde, state.B),
                    .smallness_passed = small.passed(),
                    .warnings = std::move(warnings)};
  out.residual_step2 = step2_residual(out, parts);
  return out;
}

}  // namespace driftlab
