#pragma once

#include "driftlab/fem.hpp"

namespace driftlab {

/// The three quantities gated by the smallness assumption.
struct EpsilonReport {
  double energy = 0.0;  // integral of |grad xi|^2 + |grad P|^2 + |grad P^-1|^2
  double p_inf = 1.0;   // ||P||_inf
  double pinv_inf = 1.0;
};

/// b = perp(grad xi) - grad p with p = 0 on the boundary and mean(xi) = 0,
/// plus the exponential gauge P = e^p.
struct HodgeParts {
  ScalarField p;
  ScalarField xi;
  ScalarField P;
  ScalarField Pinv;
  double residual_l2 = 0.0;  // ||b - perp(grad xi) + grad p||
  double compat_defect = 0.0;
  EpsilonReport epsilon_report;
};

HodgeParts hodge_decompose(const CellVectorField& b, const NeumannOptions& opts = {});

struct SmallnessReport {
  EpsilonReport values;
  double epsilon = 0.01;
  bool energy_ok = false;   // energy < epsilon
  bool sup_ok = false;      // ||P||_inf <= 1 + epsilon
  bool bounds_ok = false;   // 1/10 <= ||P||_inf, ||P^-1||_inf <= 10
  bool passed() const { return energy_ok && sup_ok && bounds_ok; }
};

SmallnessReport smallness_report(const HodgeParts& parts, double epsilon = 0.01);

/// ||p||_inf + ||grad p||_L2, the left side of the Hardy bound on p.
double potential_bound_lhs(const HodgeParts& parts);

}  // namespace driftlab
