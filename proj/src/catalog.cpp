#include "driftlab/catalog.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "driftlab/error.hpp"
#include "driftlab/fem.hpp"
#include "driftlab/io.hpp"

namespace driftlab {

namespace {

using Fn = std::function<double(const Vec2&)>;

const std::map<std::string, Fn>& function_table() {
  static const std::map<std::string, Fn> table = {
      {"one", [](const Vec2&) { return 1.0; }},
      {"x", [](const Vec2& p) { return p.x(); }},
      {"y", [](const Vec2& p) { return p.y(); }},
      {"xy", [](const Vec2& p) { return p.x() * p.y(); }},
      {"x2", [](const Vec2& p) { return p.x() * p.x(); }},
      {"y2", [](const Vec2& p) { return p.y() * p.y(); }},
      {"r2", [](const Vec2& p) { return p.squaredNorm(); }},
      {"x2-y2", [](const Vec2& p) { return p.x() * p.x() - p.y() * p.y(); }},
      {"sinx", [](const Vec2& p) { return std::sin(p.x()); }},
      {"cosy", [](const Vec2& p) { return std::cos(p.y()); }},
      {"bump", [](const Vec2& p) { return std::exp(-p.squaredNorm()); }},
  };
  return table;
}

const std::map<std::string, DriftKind>& kind_table() {
  static const std::map<std::string, DriftKind> table = {
      {"zero", DriftKind::Zero},       {"radial_source", DriftKind::RadialSource},
      {"radial_sink", DriftKind::RadialSink}, {"vortex", DriftKind::Vortex},
      {"jacobian", DriftKind::Jacobian}, {"stream", DriftKind::Stream},
      {"custom", DriftKind::CustomFile},
  };
  return table;
}

}  // namespace

std::function<double(const Vec2&)> named_function(const std::string& name) {
  const auto& t = function_table();
  const auto it = t.find(name);
  if (it == t.end()) throw ConfigError("unknown function '" + name + "'");
  return it->second;
}

void DriftSpec::validate() const {
  if ((kind == DriftKind::RadialSink || kind == DriftKind::Vortex) && !(eps_reg > 0.0))
    throw ConfigError("eps_reg must be positive for regularized drifts");
  if (norm && !(*norm > 0.0)) throw ConfigError("drift norm target must be positive");
  if (!std::isfinite(kappa)) throw ConfigError("kappa must be finite");
  if (kind == DriftKind::Jacobian) {
    named_function(h);
    named_function(v);
  }
  if (kind == DriftKind::Stream) named_function(xi);
  if (kind == DriftKind::CustomFile && file.empty()) throw ConfigError("custom drift needs a file");
}

CellVectorField make_drift(const DriftSpec& spec, const MeshPtr& mesh) {
  spec.validate();
  const double k = spec.kappa, e2 = spec.eps_reg * spec.eps_reg;
  CellVectorField b(mesh);
  switch (spec.kind) {
    case DriftKind::Zero:
      break;
    case DriftKind::RadialSource:
      b = sample_cells(mesh, [k](const Vec2& p) -> Vec2 { return k * p; });
      break;
    case DriftKind::RadialSink:
      b = sample_cells(mesh, [k, e2](const Vec2& p) -> Vec2 { return k * p / (p.squaredNorm() + e2); });
      break;
    case DriftKind::Vortex:
      // k (-y, x) / (r^2 + eps^2) = k perp(grad(log(r^2 + eps^2) / 2)); the
      // stream form keeps the discrete field exactly divergence-free.
      b = k * perp(gradient(interpolate(mesh, [e2](const Vec2& p) { return 0.5 * std::log(p.squaredNorm() + e2); })));
      break;
    case DriftKind::Jacobian:
      b = k * scale_cells(interpolate(mesh, named_function(spec.h)),
                          perp(gradient(interpolate(mesh, named_function(spec.v)))));
      break;
    case DriftKind::Stream:
      b = k * perp(gradient(interpolate(mesh, named_function(spec.xi))));
      break;
    case DriftKind::CustomFile: {
      std::ifstream is(spec.file);
      if (!is) throw ConfigError("cannot open drift file " + spec.file);
      b = read_cell_field(is, mesh);
      break;
    }
  }
  if (spec.norm) {
    const double n = norms(b).l2;
    if (n > 0.0) b = (*spec.norm / n) * b;
  }
  return b;
}

BoundaryValues smooth_boundary_data(const TriMesh& mesh, std::uint64_t seed) {
  std::array<std::array<double, 2>, 3> c{};
  if (seed > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t m = 0; m < c.size(); ++m) {
      const double kk = static_cast<double>((m + 2) * (m + 2));
      c[m] = {0.5 * u(rng) / kk, 0.5 * u(rng) / kk};
    }
  }
  return boundary_trace(mesh, [&c](const Vec2& p) {
    const double th = std::atan2(p.y(), p.x());
    double v = std::cos(th);
    for (std::size_t m = 0; m < c.size(); ++m) {
      const double k = static_cast<double>(m + 2);
      v += c[m][0] * std::cos(k * th) + c[m][1] * std::sin(k * th);
    }
    return v;
  });
}

std::string to_string(DriftKind kind) {
  for (const auto& [name, k] : kind_table())
    if (k == kind) return name;
  return "zero";
}

DriftKind drift_kind_from_string(const std::string& s) {
  const auto it = kind_table().find(s);
  if (it == kind_table().end()) throw ConfigError("unknown drift kind '" + s + "'");
  return it->second;
}

void to_json(nlohmann::json& j, const DriftSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"kappa", s.kappa}, {"eps_reg", s.eps_reg},
                     {"h", s.h},                  {"v", s.v},         {"xi", s.xi},
                     {"file", s.file}};
  j["norm"] = s.norm ? nlohmann::json(*s.norm) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, DriftSpec& s) {
  s = DriftSpec{};
  if (!j.is_object()) throw ConfigError("drift spec must be an object");
  s.kind = drift_kind_from_string(j.value("kind", std::string("zero")));
  s.kappa = j.value("kappa", s.kappa);
  s.eps_reg = j.value("eps_reg", s.eps_reg);
  s.h = j.value("h", s.h);
  s.v = j.value("v", s.v);
  s.xi = j.value("xi", s.xi);
  s.file = j.value("file", s.file);
  if (j.contains("norm") && !j["norm"].is_null()) s.norm = j["norm"].get<double>();
  s.validate();
}

}  // namespace driftlab
