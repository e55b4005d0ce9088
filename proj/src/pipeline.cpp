#include "driftlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "driftlab/driftsolve.hpp"
#include "driftlab/error.hpp"
#include "driftlab/hodge.hpp"
#include "driftlab/io.hpp"
#include "driftlab/riviere.hpp"

namespace driftlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

template <typename Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  fn(os);
  os.flush();
  if (!os) throw IoError("write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) {
  write_file(p, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

template <typename Field>
void write_field_file(const fs::path& p, const Field& f) {
  write_file(p, [&](std::ostream& os) { write_field(os, f); });
}

NeumannOptions neumann_options(const RunConfig& c) { return NeumannOptions{c.compat_tol, 0.0, c.solver}; }

RiviereOptions riviere_options(const RunConfig& c) {
  return RiviereOptions{c.fp_tol, c.fp_max_iter, c.epsilon, neumann_options(c)};
}

// Datum 0 is the trace of x; the others add random low modes.
std::uint64_t datum_seed(const RunConfig& c, int k) {
  return k == 0 ? 0 : c.boundary_seed * 100 + static_cast<std::uint64_t>(k);
}

// Config and I/O problems abort the run; everything else is a stage failure.
bool is_fatal(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e) ||
         dynamic_cast<const ParseError*>(&e) || dynamic_cast<const CapacityError*>(&e);
}

class Stages {
 public:
  template <typename Fn>
  bool run(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (is_fatal(e)) throw;
      record(name, false, e.what());
      return false;
    }
    record(name, true, "");
    return true;
  }
  void record(const std::string& name, bool ok, const std::string& message) {
    list_.push_back({{"name", name}, {"ok", ok}, {"message", message}});
  }
  void skip(const std::string& name, const std::string& reason) {
    list_.push_back({{"name", name}, {"ok", false}, {"skipped", true}, {"message", reason}});
  }
  const json& list() const { return list_; }

 private:
  json list_ = json::array();
};

struct HolderRow {
  std::string param;
  HolderFit fit;
};

void write_holder_csv(const fs::path& p, const std::vector<HolderRow>& rows) {
  write_file(p, [&](std::ostream& os) {
    os << "param,x0_x,x0_y,alpha,fit_r2,r_min,r_max\n";
    for (const auto& r : rows)
      os << r.param << ',' << format_double(r.fit.x0.x()) << ',' << format_double(r.fit.x0.y()) << ','
         << format_double(r.fit.alpha) << ',' << format_double(r.fit.fit_r2) << ','
         << format_double(r.fit.r_min) << ',' << format_double(r.fit.r_max) << '\n';
  });
}

json to_json(const HolderFit& f) {
  return json{{"alpha", f.alpha},   {"alpha_raw", f.alpha_raw}, {"fit_r2", f.fit_r2},
              {"r_min", f.r_min},   {"r_max", f.r_max},         {"radii", f.radii.size()},
              {"inconclusive", f.inconclusive}};
}

json to_json(const HardyReport& r) {
  return json{{"l1", r.l1},     {"riesz1_l1", r.riesz_l1[0]}, {"riesz2_l1", r.riesz_l1[1]},
              {"total", r.total}, {"mean", r.mean},          {"L", r.grid.L},
              {"N", r.grid.N}};
}

struct Run {
  const RunConfig& cfg;
  fs::path out;
  MeshPtr mesh;
  std::optional<CellVectorField> b;
  std::optional<HodgeParts> parts;
  std::optional<RiviereDecomp> decomp;
  std::vector<HolderRow> holder_rows;
  Stages stages;
  json summary;

  Run(const RunConfig& c, fs::path dir, const std::string& verb) : cfg(c), out(std::move(dir)) {
    cfg.validate();
    ensure_dir(out);
    summary["verb"] = verb;
    summary["config"] = config_to_json(cfg);
    mesh = build_disk_mesh(cfg.level, cfg.mesh_cap);
    write_file(out / "mesh.txt", [&](std::ostream& os) { write_mesh(os, *mesh); });
    summary["mesh"] = {{"level", mesh->level()},
                       {"vertices", mesh->num_vertices()},
                       {"triangles", mesh->num_triangles()},
                       {"boundary_edges", mesh->boundary_edges().size()},
                       {"h", mesh->h()}};
  }

  json finish() {
    summary["stages"] = stages.list();
    bool all_ok = true;
    for (const auto& s : stages.list()) all_ok = all_ok && s["ok"].get<bool>();
    summary["all_stages_ok"] = all_ok;
    write_json(out / "summary.json", summary);
    return summary;
  }
};

void setup_drift(Run& run) {
  run.b = make_drift(run.cfg.drift, run.mesh);
  write_field_file(run.out / "b.field", *run.b);
  json d = run.cfg.drift;
  d["l2"] = norms(*run.b).l2;
  run.summary["drift"] = d;
}

void stage_hodge(Run& run) {
  run.stages.run("hodge", [&] {
    run.parts = hodge_decompose(*run.b, neumann_options(run.cfg));
    run.summary["hodge"] = {{"residual_l2", run.parts->residual_l2},
                            {"compat_defect", run.parts->compat_defect},
                            {"p_l2", norms(run.parts->p).l2},
                            {"xi_l2", norms(run.parts->xi).l2},
                            {"potential_bound_lhs", potential_bound_lhs(*run.parts)}};
    write_field_file(run.out / "p.field", run.parts->p);
    write_field_file(run.out / "xi.field", run.parts->xi);
  });
}

void stage_smallness(Run& run) {
  if (!run.parts) return run.stages.skip("smallness", "hodge stage failed");
  const SmallnessReport r = smallness_report(*run.parts, run.cfg.epsilon);
  run.summary["smallness"] = {{"energy", r.values.energy}, {"p_inf", r.values.p_inf},
                              {"pinv_inf", r.values.pinv_inf}, {"epsilon", r.epsilon},
                              {"energy_ok", r.energy_ok},    {"sup_ok", r.sup_ok},
                              {"bounds_ok", r.bounds_ok},    {"passed", r.passed()}};
  run.stages.record("smallness", r.passed(), r.passed() ? "" : "drift exceeds the smallness threshold");
}

void stage_riviere(Run& run) {
  if (!run.parts) return run.stages.skip("riviere", "hodge stage failed");
  run.stages.run("riviere", [&] {
    try {
      run.decomp = decompose(*run.b, *run.parts, riviere_options(run.cfg));
    } catch (const ConvergenceError& e) {
      run.summary["riviere"] = {{"converged", false},
                                {"contraction_trace", e.trace()},
                                {"contraction_ratio", contraction_ratio(e.trace())}};
      throw;
    }
    const RiviereDecomp& d = *run.decomp;
    const double b_l2 = norms(*run.b).l2;
    run.summary["riviere"] = {
        {"converged", true},
        {"iterations", d.iterations},
        {"contraction_trace", d.contraction_trace},
        {"contraction_ratio", d.contraction_ratio},
        {"residual_ab", d.residual_ab},
        {"residual_ab_relative", b_l2 > 0.0 ? d.residual_ab / b_l2 : 0.0},
        {"residual_step2", d.residual_step2},
        {"step2_within_2x", d.residual_step2 <= 2.0 * d.residual_ab + 1e-12},
        {"bounds",
         {{"A_inf", d.bounds.A_inf},
          {"Ainv_inf", d.bounds.Ainv_inf},
          {"Atilde_dev_inf", d.bounds.Atilde_dev_inf},
          {"grad_Atilde_l2", d.bounds.grad_Atilde_l2},
          {"grad_B_l2", d.bounds.grad_B_l2}}},
        {"smallness_passed", d.smallness_passed},
        {"warnings", d.warnings}};
    write_field_file(run.out / "A.field", d.A);
    write_field_file(run.out / "B.field", d.B);
    write_field_file(run.out / "Atilde.field", d.Atilde);
    write_field_file(run.out / "B0.field", d.B0);
    write_file(run.out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, d.trace); });
  });
}

void stage_solves(Run& run, bool with_holder) {
  const RunConfig& cfg = run.cfg;
  json entries = json::array();
  std::string drift_errors, cons_errors, holder_errors;
  double worst_diff = 0.0, min_alpha = kNaN;
  for (int k = 0; k < cfg.boundary_count; ++k) {
    const std::uint64_t seed = datum_seed(cfg, k);
    const BoundaryValues g = smooth_boundary_data(*run.mesh, seed);
    const double g_inf = g.cwiseAbs().maxCoeff();
    json e = {{"datum", k}, {"seed", seed}, {"g_inf", g_inf}};
    const std::string tag = std::to_string(k);

    std::optional<ScalarField> u_drift, u_cons;
    try {
      u_drift = solve_drift(DriftProblem{*run.b, g, std::nullopt}, cfg.solver);
      write_field_file(run.out / ("u_drift_" + tag + ".field"), *u_drift);
    } catch (const Error& err) {
      if (is_fatal(err)) throw;
      e["drift_error"] = err.what();
      drift_errors += "datum " + tag + ": " + err.what() + "; ";
    }
    if (run.decomp) {
      try {
        u_cons = solve_conservation(run.decomp->A, run.decomp->B, g, std::nullopt, cfg.solver);
        write_field_file(run.out / ("u_cons_" + tag + ".field"), *u_cons);
      } catch (const Error& err) {
        if (is_fatal(err)) throw;
        e["conservation_error"] = err.what();
        cons_errors += "datum " + tag + ": " + err.what() + "; ";
      }
    }
    if (u_drift && u_cons) {
      const double diff = norms(*u_cons - *u_drift).l2;
      e["diff_l2"] = diff;
      e["diff_relative"] = diff / g_inf;
      worst_diff = std::max(worst_diff, diff / g_inf);
    }
    const ScalarField* u = u_drift ? &*u_drift : (u_cons ? &*u_cons : nullptr);
    if (with_holder && u) {
      try {
        const HolderFit fit = holder_fit(*u, cfg.holder_x0, cfg.holder_r_max, cfg.holder_n_dyadic, cfg.holder);
        e["holder"] = to_json(fit);
        min_alpha = std::isnan(min_alpha) ? fit.alpha : std::min(min_alpha, fit.alpha);
        run.holder_rows.push_back({tag, fit});
      } catch (const Error& err) {
        if (is_fatal(err)) throw;
        e["holder_error"] = err.what();
        holder_errors += "datum " + tag + ": " + err.what() + "; ";
      }
    }
    entries.push_back(std::move(e));
  }
  run.summary["solves"] = entries;
  run.summary["solve_stats"] = {{"worst_diff_relative", worst_diff}, {"min_alpha", min_alpha}};
  run.stages.record("drift_solve", drift_errors.empty(), drift_errors);
  if (run.decomp)
    run.stages.record("conservation_solve", cons_errors.empty(), cons_errors);
  else
    run.stages.skip("conservation_solve", "no converged decomposition");
  if (with_holder) {
    run.stages.record("holder", holder_errors.empty(), holder_errors);
    write_holder_csv(run.out / "holder.csv", run.holder_rows);
  }
}

void stage_uniqueness(Run& run) {
  if (!run.decomp) return run.stages.skip("uniqueness", "no converged decomposition");
  run.stages.run("uniqueness", [&] {
    const UniquenessReport r = uniqueness_energy(run.decomp->A, run.decomp->B, run.cfg.boundary_seed);
    run.summary["uniqueness"] = {{"energy", r.energy}, {"iterations", r.iterations}};
  });
}

void stage_hardy(Run& run, bool dump_grid) {
  run.stages.run("hardy", [&] {
    const GridField grid = divergence_grid(*run.b, run.cfg.hardy);
    const HardyReport r = hardy_norm(grid);
    json h = to_json(r);
    if (run.parts) {
      const double lhs = potential_bound_lhs(*run.parts);
      h["potential_bound_lhs"] = lhs;
      h["pbound_ratio"] = r.total > 0.0 ? lhs / r.total : 0.0;
    }
    run.summary["hardy"] = h;
    write_file(run.out / "hardy.csv",
               [&](std::ostream& os) { os << hardy_csv_header() << '\n' << hardy_csv_row(r) << '\n'; });
    if (dump_grid)
      write_file(run.out / "div_b.grid", [&](std::ostream& os) { write_grid(os, grid); });
  });
}

struct SweepRun {
  SweepRow row;
  std::vector<HolderRow> holder;
};

SweepRun sweep_one(const RunConfig& cfg, const MeshPtr& mesh, double eps_reg, const fs::path& dir) {
  ensure_dir(dir);
  DriftSpec spec = cfg.drift;
  spec.eps_reg = eps_reg;
  spec.validate();
  SweepRun res;
  res.row.eps_reg = eps_reg;
  res.row.alpha = kNaN;
  const CellVectorField b = make_drift(spec, mesh);
  const HardyReport hardy = divergence_hardy(b, cfg.hardy);
  res.row.hardy_total = hardy.total;
  json fits = json::array();
  for (int k = 0; k < cfg.boundary_count; ++k) {
    json e = {{"datum", k}};
    try {
      const BoundaryValues g = smooth_boundary_data(*mesh, datum_seed(cfg, k));
      const ScalarField u = solve_drift(DriftProblem{b, g, std::nullopt}, cfg.solver);
      const HolderFit fit = holder_fit(u, cfg.holder_x0, cfg.holder_r_max, cfg.holder_n_dyadic, cfg.holder);
      e["holder"] = to_json(fit);
      res.row.alpha = res.row.fits == 0 ? fit.alpha : std::min(res.row.alpha, fit.alpha);
      ++res.row.fits;
      res.holder.push_back({format_double(eps_reg), fit});
    } catch (const Error& err) {
      if (is_fatal(err)) throw;
      e["error"] = err.what();
    }
    fits.push_back(std::move(e));
  }
  json d = spec;
  d["l2"] = norms(b).l2;
  write_json(dir / "summary.json", json{{"eps_reg", eps_reg},
                                        {"drift", d},
                                        {"hardy", to_json(hardy)},
                                        {"alpha", res.row.alpha},
                                        {"fits", fits}});
  write_holder_csv(dir / "holder.csv", res.holder);
  return res;
}

std::vector<SweepRun> sweep_runs(const RunConfig& cfg, const fs::path& out) {
  const MeshPtr mesh = build_disk_mesh(cfg.level, cfg.mesh_cap);
  const std::size_t n = cfg.sweep_eps_reg.size();
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRun> runs;
  runs.reserve(n);
  for (std::size_t start = 0; start < n; start += workers) {
    std::vector<std::future<SweepRun>> jobs;
    for (std::size_t i = start; i < std::min(n, start + workers); ++i) {
      const double e = cfg.sweep_eps_reg[i];
      jobs.push_back(std::async(std::launch::async, [&cfg, &mesh, &out, e] {
        return sweep_one(cfg, mesh, e, out / "sweep" / ("eps_" + format_double(e)));
      }));
    }
    for (auto& j : jobs) runs.push_back(j.get());
  }
  std::vector<SweepRow> rows;
  write_file(out / "sweep.csv", [&](std::ostream& os) {
    os << "eps_reg,hardy_total,alpha\n";
    for (const auto& r : runs)
      os << format_double(r.row.eps_reg) << ',' << format_double(r.row.hardy_total) << ','
         << format_double(r.row.alpha) << '\n';
  });
  return runs;
}

json sweep_json(const std::vector<SweepRun>& runs) {
  json rows = json::array();
  for (const auto& r : runs)
    rows.push_back({{"eps_reg", r.row.eps_reg},
                    {"hardy_total", r.row.hardy_total},
                    {"alpha", r.row.alpha},
                    {"fits", r.row.fits}});
  return rows;
}

void stage_sweep(Run& run) {
  if (run.cfg.sweep_eps_reg.empty()) return;
  run.stages.run("sweep", [&] { run.summary["sweep"] = sweep_json(sweep_runs(run.cfg, run.out)); });
}

CalibrationProbe probe(const RunConfig& cfg, const MeshPtr& mesh, double amplitude) {
  CalibrationProbe p;
  p.amplitude = amplitude;
  DriftSpec spec = cfg.drift;
  spec.norm = amplitude;
  try {
    const CellVectorField b = make_drift(spec, mesh);
    const HodgeParts parts = hodge_decompose(b, neumann_options(cfg));
    p.smallness = smallness_report(parts, cfg.epsilon).passed();
    if (p.smallness) {
      const RiviereDecomp d = decompose(b, parts, riviere_options(cfg));
      p.converged = true;
      p.ratio = d.contraction_ratio;
    }
  } catch (const ConvergenceError& e) {
    p.ratio = contraction_ratio(e.trace());
  } catch (const Error& e) {
    if (is_fatal(e)) throw;
  }
  p.accepted = p.smallness && p.converged && p.ratio < 1.0;
  return p;
}

}  // namespace

json run_mesh(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "mesh");
  const BoundaryGeometry geo = boundary_geometry(*run.mesh);
  run.summary["mesh"]["total_area"] = run.mesh->total_area();
  run.summary["mesh"]["perimeter"] = std::accumulate(geo.length.begin(), geo.length.end(), 0.0);
  return run.finish();
}

json run_decompose(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "decompose");
  setup_drift(run);
  stage_hodge(run);
  stage_smallness(run);
  stage_riviere(run);
  return run.finish();
}

json run_solve(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "solve");
  setup_drift(run);
  stage_hodge(run);
  stage_smallness(run);
  stage_riviere(run);
  stage_solves(run, false);
  stage_uniqueness(run);
  return run.finish();
}

json run_solve_bundle(const RunConfig& cfg, const fs::path& bundle, const fs::path& out) {
  cfg.validate();
  ensure_dir(out);
  const ProblemBundle pb = read_bundle(bundle);
  json summary = {{"verb", "solve"}, {"config", config_to_json(cfg)}, {"bundle", bundle.string()}};
  summary["mesh"] = {{"level", pb.mesh->level()},
                     {"vertices", pb.mesh->num_vertices()},
                     {"triangles", pb.mesh->num_triangles()},
                     {"h", pb.mesh->h()}};
  Stages stages;
  stages.run("drift_solve", [&] {
    const ScalarField u = solve_drift(pb.problem, cfg.solver);
    write_field_file(out / "u_drift.field", u);
    summary["solution"] = {{"l2", norms(u).l2}, {"linf", norms(u).linf}};
  });
  summary["stages"] = stages.list();
  summary["all_stages_ok"] = stages.list()[0]["ok"];
  write_json(out / "summary.json", summary);
  return summary;
}

json run_hardy(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "hardy");
  setup_drift(run);
  stage_hodge(run);
  stage_hardy(run, true);
  return run.finish();
}

json run_holder(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "holder");
  setup_drift(run);
  if (cfg.sweep_eps_reg.empty()) {
    stage_solves(run, true);
  } else {
    run.stages.run("sweep", [&] {
      const auto runs = sweep_runs(cfg, out);
      std::vector<HolderRow> rows;
      for (const auto& r : runs) rows.insert(rows.end(), r.holder.begin(), r.holder.end());
      write_holder_csv(out / "holder.csv", rows);
      run.summary["sweep"] = sweep_json(runs);
    });
  }
  return run.finish();
}

json run_pipeline(const RunConfig& cfg, const fs::path& out) {
  Run run(cfg, out, "pipeline");
  setup_drift(run);
  stage_hodge(run);
  stage_smallness(run);
  stage_riviere(run);
  stage_solves(run, true);
  stage_uniqueness(run);
  stage_hardy(run, false);
  stage_sweep(run);
  return run.finish();
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  ensure_dir(out);
  std::vector<SweepRow> rows;
  for (const auto& r : sweep_runs(cfg, out)) rows.push_back(r.row);
  return rows;
}

CalibrationResult calibrate_epsilon(const RunConfig& cfg) {
  cfg.validate();
  const MeshPtr mesh = build_disk_mesh(cfg.level, cfg.mesh_cap);
  CalibrationResult res;
  auto test = [&](double a) {
    res.probes.push_back(probe(cfg, mesh, a));
    return res.probes.back().accepted;
  };
  double lo = cfg.calibrate_lo, hi = cfg.calibrate_hi;
  if (test(hi)) {
    res.threshold = hi;
    res.at_upper_bound = true;
  } else if (test(lo)) {
    // geometric bisection: the bracket spans decades
    for (int k = 0; k < cfg.calibrate_iterations; ++k) {
      const double mid = std::sqrt(lo * hi);
      (test(mid) ? lo : hi) = mid;
    }
    res.threshold = lo;
  }
  if (res.threshold > 0.0) {
    DriftSpec spec = cfg.drift;
    spec.norm = res.threshold;
    const CellVectorField b = make_drift(spec, mesh);
    res.b_l2 = norms(b).l2;
    res.hardy_total = divergence_hardy(b, cfg.hardy).total;
    res.norm_plus_hardy = res.b_l2 + res.hardy_total;
  }
  return res;
}

json run_calibrate(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  ensure_dir(out);
  const CalibrationResult r = calibrate_epsilon(cfg);
  write_file(out / "calibration.csv", [&](std::ostream& os) {
    os << "amplitude,smallness,converged,ratio,accepted\n";
    for (const auto& p : r.probes)
      os << format_double(p.amplitude) << ',' << int(p.smallness) << ',' << int(p.converged) << ','
         << format_double(p.ratio) << ',' << int(p.accepted) << '\n';
  });
  json summary = {{"verb", "calibrate"},
                  {"config", config_to_json(cfg)},
                  {"calibration",
                   {{"threshold", r.threshold},
                    {"b_l2", r.b_l2},
                    {"hardy_total", r.hardy_total},
                    {"norm_plus_hardy", r.norm_plus_hardy},
                    {"at_upper_bound", r.at_upper_bound},
                    {"found", r.threshold > 0.0},
                    {"probes", r.probes.size()}}}};
  write_json(out / "summary.json", summary);
  return summary;
}

}  // namespace driftlab
