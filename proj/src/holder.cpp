#include "driftlab/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

constexpr double kSlack = 1e-12;

bool inside_disk(const Vec2& x0, double r) { return r > 0.0 && x0.norm() + r <= 1.0 + kSlack; }

double raw_oscillation(const ScalarField& u, const Vec2& x0, double r) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const auto& verts = u.mesh().vertices();
  for (std::size_t i = 0; i < verts.size(); ++i)
    if ((verts[i] - x0).norm() <= r + kSlack) {
      lo = std::min(lo, u[i]);
      hi = std::max(hi, u[i]);
    }
  return hi >= lo ? hi - lo : 0.0;
}

}  // namespace

double oscillation(const ScalarField& u, const Vec2& x0, double r, const HolderOptions& opts) {
  if (!inside_disk(x0, r)) throw DomainError("oscillation ball must lie in the unit disk");
  if (r < opts.resolution_factor * u.mesh().h()) throw DomainError("oscillation ball is below mesh resolution");
  return raw_oscillation(u, x0, r);
}

HolderFit holder_fit(const ScalarField& u, const Vec2& x0, double r_max, int n_dyadic, const HolderOptions& opts) {
  if (n_dyadic < 3) throw DomainError("Hölder fit needs at least three dyadic radii");
  HolderFit fit;
  fit.x0 = x0;
  const double r_floor = opts.resolution_factor * u.mesh().h();
  double r = r_max;
  for (int k = 0; k < n_dyadic; ++k, r *= 0.5) {
    if (r < r_floor || !inside_disk(x0, r)) continue;
    const double osc = raw_oscillation(u, x0, r);
    if (!(osc > 0.0)) continue;
    fit.radii.push_back(r);
    fit.oscillations.push_back(osc);
  }
  if (fit.radii.size() < 3)
    throw WindowError("only " + std::to_string(fit.radii.size()) + " admissible radii for the Hölder fit");

  const auto n = static_cast<double>(fit.radii.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < fit.radii.size(); ++k) {
    const double x = std::log(fit.radii[k]), y = std::log(fit.oscillations[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  fit.alpha_raw = cxy / cxx;
  fit.fit_r2 = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
  fit.alpha = std::min(fit.alpha_raw, 1.0 + opts.fit_tol);
  fit.r_max = fit.radii.front();
  fit.r_min = fit.radii.back();
  fit.inconclusive = fit.fit_r2 < opts.min_r2;
  return fit;
}

}  // namespace driftlab
