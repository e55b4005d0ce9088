#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "driftlab/fields.hpp"

namespace driftlab {

enum class DriftKind { Zero, RadialSource, RadialSink, Vortex, Jacobian, Stream, CustomFile };

/// A drift family member. Formulas, with r^2 = x^2 + y^2:
///   radial_source  kappa (x, y)
///   radial_sink    kappa (x, y) / (r^2 + eps_reg^2)
///   vortex         kappa (-y, x) / (r^2 + eps_reg^2), realized as kappa
///                  perp(grad psi) with psi = log(r^2 + eps_reg^2) / 2
///                  interpolated, so it is divergence-free on the mesh
///   jacobian       h perp(grad v), h averaged to cells, v interpolated
///   stream         perp(grad xi), xi interpolated
///   custom         cell field read from a diskfield file
/// When norm is set the field is rescaled to that L2 norm.
struct DriftSpec {
  DriftKind kind = DriftKind::Zero;
  double kappa = 1.0;
  double eps_reg = 0.1;
  std::string h = "one";
  std::string v = "y";
  std::string xi = "xy";
  std::string file;
  std::optional<double> norm;

  /// Throws ConfigError for nonpositive eps_reg or norm, unknown function
  /// names, or a custom kind without a file.
  void validate() const;
};

/// Closed-form scalar functions usable in drift specs: one, x, y, xy, x2,
/// y2, r2, x2-y2, sinx, cosy, bump.
std::function<double(const Vec2&)> named_function(const std::string& name);

CellVectorField make_drift(const DriftSpec& spec, const MeshPtr& mesh);

/// Boundary data cos(theta) plus, for seed > 0, modes 2..4 with random
/// coefficients bounded by 0.5 / k^2.
BoundaryValues smooth_boundary_data(const TriMesh& mesh, std::uint64_t seed);

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& s);

void to_json(nlohmann::json& j, const DriftSpec& s);
void from_json(const nlohmann::json& j, DriftSpec& s);

}  // namespace driftlab
