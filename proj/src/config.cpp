#include "driftlab/config.hpp"

#include <fstream>
#include <set>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (level < 0) throw ConfigError("level must be nonnegative");
  if (!(solver.rtol > 0.0) || solver.atol < 0.0 || solver.max_iter < 0)
    throw ConfigError("solver tolerances must be positive");
  if (!(compat_tol > 0.0)) throw ConfigError("compat_tol must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(fp_tol > 0.0) || fp_max_iter < 1) throw ConfigError("fixed-point tol and max_iter must be positive");
  hardy.validate();
  if (!(holder_r_max > 0.0) || holder_n_dyadic < 3) throw ConfigError("holder window needs r_max > 0 and n_dyadic >= 3");
  if (!(holder.fit_tol > 0.0) || !(holder.min_r2 > 0.0)) throw ConfigError("holder tolerances must be positive");
  if (boundary_count < 1) throw ConfigError("boundary data count must be at least 1");
  for (double e : sweep_eps_reg)
    if (!(e > 0.0)) throw ConfigError("sweep eps_reg values must be positive");
  if (!(calibrate_lo > 0.0) || !(calibrate_hi > calibrate_lo) || calibrate_iterations < 1)
    throw ConfigError("calibration bracket must satisfy 0 < lo < hi");
  drift.validate();
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, {"level", "mesh_cap", "solver", "compat_tol", "epsilon", "fixed_point", "hardy", "holder",
                     "boundary_data", "drift", "sweep", "calibrate"},
                 "config");
  take(j, "level", c.level);
  take(j, "mesh_cap", c.mesh_cap);
  take(j, "compat_tol", c.compat_tol);
  take(j, "epsilon", c.epsilon);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s, {"rtol", "atol", "max_iter"}, "solver");
    take(s, "rtol", c.solver.rtol);
    take(s, "atol", c.solver.atol);
    take(s, "max_iter", c.solver.max_iter);
  }
  if (j.contains("fixed_point")) {
    const auto& s = j["fixed_point"];
    reject_unknown(s, {"tol", "max_iter"}, "fixed_point");
    take(s, "tol", c.fp_tol);
    take(s, "max_iter", c.fp_max_iter);
  }
  if (j.contains("hardy")) {
    const auto& s = j["hardy"];
    reject_unknown(s, {"L", "N"}, "hardy");
    take(s, "L", c.hardy.L);
    take(s, "N", c.hardy.N);
  }
  if (j.contains("holder")) {
    const auto& s = j["holder"];
    reject_unknown(s, {"x0", "r_max", "n_dyadic", "fit_tol", "min_r2"}, "holder");
    if (s.contains("x0")) {
      std::vector<double> x0;
      take(s, "x0", x0);
      if (x0.size() != 2) throw ConfigError("holder.x0 must have two entries");
      c.holder_x0 = Vec2(x0[0], x0[1]);
    }
    take(s, "r_max", c.holder_r_max);
    take(s, "n_dyadic", c.holder_n_dyadic);
    take(s, "fit_tol", c.holder.fit_tol);
    take(s, "min_r2", c.holder.min_r2);
  }
  if (j.contains("boundary_data")) {
    const auto& s = j["boundary_data"];
    reject_unknown(s, {"count", "seed"}, "boundary_data");
    take(s, "count", c.boundary_count);
    take(s, "seed", c.boundary_seed);
  }
  if (j.contains("drift")) {
    reject_unknown(j["drift"], {"kind", "kappa", "eps_reg", "h", "v", "xi", "file", "norm"}, "drift");
    try {
      c.drift = j["drift"].get<DriftSpec>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad drift spec: ") + e.what());
    }
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown(s, {"eps_reg"}, "sweep");
    take(s, "eps_reg", c.sweep_eps_reg);
  }
  if (j.contains("calibrate")) {
    const auto& s = j["calibrate"];
    reject_unknown(s, {"lo", "hi", "iterations"}, "calibrate");
    take(s, "lo", c.calibrate_lo);
    take(s, "hi", c.calibrate_hi);
    take(s, "iterations", c.calibrate_iterations);
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  return json{
      {"level", c.level},
      {"mesh_cap", c.mesh_cap},
      {"solver", {{"rtol", c.solver.rtol}, {"atol", c.solver.atol}, {"max_iter", c.solver.max_iter}}},
      {"compat_tol", c.compat_tol},
      {"epsilon", c.epsilon},
      {"fixed_point", {{"tol", c.fp_tol}, {"max_iter", c.fp_max_iter}}},
      {"hardy", {{"L", c.hardy.L}, {"N", c.hardy.N}}},
      {"holder",
       {{"x0", {c.holder_x0.x(), c.holder_x0.y()}},
        {"r_max", c.holder_r_max},
        {"n_dyadic", c.holder_n_dyadic},
        {"fit_tol", c.holder.fit_tol},
        {"min_r2", c.holder.min_r2}}},
      {"boundary_data", {{"count", c.boundary_count}, {"seed", c.boundary_seed}}},
      {"drift", c.drift},
      {"sweep", {{"eps_reg", c.sweep_eps_reg}}},
      {"calibrate", {{"lo", c.calibrate_lo}, {"hi", c.calibrate_hi}, {"iterations", c.calibrate_iterations}}},
  };
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace driftlab
