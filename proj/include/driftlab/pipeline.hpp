#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "driftlab/config.hpp"

namespace driftlab {

// Every verb writes its artifacts and a summary.json (embedding the resolved
// config) into out, and returns the summary. Numerical stage failures are
// recorded under "stages"; only config and I/O problems throw.

nlohmann::json run_mesh(const RunConfig& cfg, const std::filesystem::path& out);
/// hodge -> smallness -> riviere; writes the fields and trace.csv.
nlohmann::json run_decompose(const RunConfig& cfg, const std::filesystem::path& out);
/// Decomposition followed by drift and conservation solves for every
/// boundary datum and the homogeneous uniqueness check.
nlohmann::json run_solve(const RunConfig& cfg, const std::filesystem::path& out);
/// Drift solve of a problem bundle directory.
nlohmann::json run_solve_bundle(const RunConfig& cfg, const std::filesystem::path& bundle,
                                const std::filesystem::path& out);
/// Hardy surrogate of div b; writes hardy.csv and the rasterized div b grid.
nlohmann::json run_hardy(const RunConfig& cfg, const std::filesystem::path& out);
/// Hölder scan of drift solutions; rows of holder.csv are keyed by the
/// boundary datum index, or by eps_reg when a sweep is configured.
nlohmann::json run_holder(const RunConfig& cfg, const std::filesystem::path& out);
/// Every stage in order, plus the eps_reg sweep when configured.
nlohmann::json run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

struct SweepRow {
  double eps_reg = 0.0;
  double hardy_total = 0.0;
  double alpha = 0.0;  // smallest fitted exponent over the boundary data; NaN if no fit
  int fits = 0;
};

/// Replaces eps_reg of the configured drift by each value; runs are
/// independent and execute concurrently, each writing to
/// out/sweep/eps_<value>. Rows come back in the configured order.
std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::filesystem::path& out);

struct CalibrationProbe {
  double amplitude = 0.0;
  bool smallness = false;
  bool converged = false;
  double ratio = 0.0;
  bool accepted = false;
};

struct CalibrationResult {
  double threshold = 0.0;  // largest accepted amplitude found
  double b_l2 = 0.0;
  double hardy_total = 0.0;
  double norm_plus_hardy = 0.0;
  bool at_upper_bound = false;
  std::vector<CalibrationProbe> probes;
};

/// Bisection on the L2 amplitude of the configured drift family between
/// calibrate_lo and calibrate_hi. An amplitude is accepted when the drift
/// passes the smallness check and the fixed point converges with trace
/// ratio below 1.
CalibrationResult calibrate_epsilon(const RunConfig& cfg);
nlohmann::json run_calibrate(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace driftlab
