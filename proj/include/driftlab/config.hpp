#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "driftlab/catalog.hpp"
#include "driftlab/fem.hpp"
#include "driftlab/hardy.hpp"
#include "driftlab/holder.hpp"

namespace driftlab {

struct RunConfig {
  int level = 5;
  std::size_t mesh_cap = kDefaultVertexCap;
  SolverOptions solver{};
  double compat_tol = 1e-8;
  double epsilon = 0.01;  // smallness threshold

  double fp_tol = 1e-8;
  int fp_max_iter = 50;

  PeriodicGrid hardy{};

  Vec2 holder_x0 = Vec2::Zero();
  double holder_r_max = 0.875;
  int holder_n_dyadic = 6;
  HolderOptions holder{};

  int boundary_count = 5;
  std::uint64_t boundary_seed = 1;

  DriftSpec drift{};
  std::vector<double> sweep_eps_reg;  // radial-sink style sweep, empty to skip

  double calibrate_lo = 1e-3;
  double calibrate_hi = 1.0;
  int calibrate_iterations = 20;

  /// Throws ConfigError for nonpositive tolerances, invalid grids, and so on.
  void validate() const;
};

/// Missing keys take the defaults above; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

}  // namespace driftlab
