#pragma once

#include <vector>

#include "driftlab/fields.hpp"

namespace driftlab {

struct HolderFit {
  Vec2 x0 = Vec2::Zero();
  std::vector<double> radii;         // admissible radii, decreasing
  std::vector<double> oscillations;  // one per radius
  double alpha = 0.0;                // slope, capped at 1 + fit_tol
  double alpha_raw = 0.0;            // uncapped least-squares slope
  double fit_r2 = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  bool inconclusive = false;  // fit_r2 below the acceptance threshold
};

struct HolderOptions {
  double fit_tol = 0.05;
  double min_r2 = 0.98;
  double resolution_factor = 4.0;  // radii below this many mesh sizes are discarded
};

/// max - min of u over the vertices in the closed ball B_r(x0). Throws
/// DomainError when the ball leaves the disk or r < 4h.
double oscillation(const ScalarField& u, const Vec2& x0, double r, const HolderOptions& opts = {});

/// Least-squares slope of log osc against log r over r_max / 2^k,
/// k = 0..n_dyadic-1, keeping radii that are resolved, inside the disk and
/// have positive oscillation. Throws WindowError with fewer than three.
HolderFit holder_fit(const ScalarField& u, const Vec2& x0, double r_max, int n_dyadic,
                     const HolderOptions& opts = {});

}  // namespace driftlab
