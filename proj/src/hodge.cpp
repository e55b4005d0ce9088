#include "driftlab/hodge.hpp"

#include <cmath>

namespace driftlab {

HodgeParts hodge_decompose(const CellVectorField& b, const NeumannOptions& opts) {
  const MeshPtr& mesh = b.mesh_ptr();
  const auto nb = static_cast<Eigen::Index>(mesh->boundary_vertices().size());

  ScalarField p = solve_dirichlet(mesh, weak_divergence(b), BoundaryValues::Zero(nb), opts.solver);
  auto neumann = solve_neumann(mesh, weak_curl(b), tangential_trace(b), opts);
  ScalarField xi = std::move(neumann.w);

  ScalarField P = nodal_map(p, [](double v) { return std::exp(v); });
  ScalarField Pinv = nodal_map(p, [](double v) { return std::exp(-v); });

  const double residual = norms(b - perp(gradient(xi)) + gradient(p)).l2;

  EpsilonReport eps;
  const double gx = norms(xi).h1_semi, gp = norms(P).h1_semi, gq = norms(Pinv).h1_semi;
  eps.energy = gx * gx + gp * gp + gq * gq;
  eps.p_inf = P.values().cwiseAbs().maxCoeff();
  eps.pinv_inf = Pinv.values().cwiseAbs().maxCoeff();

  return HodgeParts{std::move(p), std::move(xi), std::move(P), std::move(Pinv),
                    residual,     neumann.defect, eps};
}

SmallnessReport smallness_report(const HodgeParts& parts, double epsilon) {
  SmallnessReport r;
  r.values = parts.epsilon_report;
  r.epsilon = epsilon;
  r.energy_ok = r.values.energy < epsilon;
  r.sup_ok = r.values.p_inf <= 1.0 + epsilon;
  auto in_range = [](double v) { return v >= 0.1 && v <= 10.0; };
  r.bounds_ok = in_range(r.values.p_inf) && in_range(r.values.pinv_inf);
  return r;
}

double potential_bound_lhs(const HodgeParts& parts) {
  const Norms n = norms(parts.p);
  return n.linf + n.h1_semi;
}

}  // namespace driftlab
