#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "driftlab/config.hpp"
#include "driftlab/error.hpp"
#include "driftlab/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void print_stages(const nlohmann::json& summary) {
  if (!summary.contains("stages")) return;
  for (const auto& s : summary["stages"]) {
    const bool ok = s["ok"].get<bool>();
    std::cout << (ok ? "  ok    " : (s.contains("skipped") ? "  skip  " : "  FAIL  ")) << s["name"].get<std::string>();
    if (!ok && !s["message"].get<std::string>().empty()) std::cout << ": " << s["message"].get<std::string>();
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace driftlab;
  namespace fs = std::filesystem;

  CLI::App app{"Elliptic equations with divergence-controlled drifts on the unit disk"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<int> level;
  std::string bundle;

  using Verb = std::function<nlohmann::json(const RunConfig&, const fs::path&)>;
  const std::map<std::string, std::pair<std::string, Verb>> verbs = {
      {"mesh", {"build the disk mesh and write it", run_mesh}},
      {"decompose", {"Hodge split, smallness check and the (A, B) fixed point", run_decompose}},
      {"solve", {"drift and conservation solves over the boundary data",
                 [&](const RunConfig& c, const fs::path& out) {
                   return bundle.empty() ? run_solve(c, out) : run_solve_bundle(c, bundle, out);
                 }}},
      {"hardy", {"Hardy-space surrogate of div b", run_hardy}},
      {"holder", {"Hölder exponent scan of drift solutions", run_holder}},
      {"pipeline", {"every stage in order", run_pipeline}},
      {"calibrate", {"bisect the drift amplitude for the smallness threshold", run_calibrate}},
  };

  std::map<CLI::App*, const Verb*> by_cmd;
  for (const auto& [name, entry] : verbs) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON config file; missing keys take defaults")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--level", level, "override the mesh level");
    if (name == "solve") sub->add_option("--bundle", bundle, "solve a problem bundle directory instead");
    by_cmd[sub] = &entry.second;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (level) cfg.level = *level;
    cfg.validate();
    for (const auto& [sub, verb] : by_cmd) {
      if (!sub->parsed()) continue;
      const nlohmann::json summary = (*verb)(cfg, out_dir);
      std::cout << sub->get_name() << ": wrote " << (fs::path(out_dir) / "summary.json").string() << '\n';
      print_stages(summary);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    // config, parse and capacity problems: nothing numerical ran
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
