// lab: command-line driver for the estimate experiments.
//
//   lab run <id> [--config file.json] [--resolutions 33,65,129] [--ensemble 20]
//                [--seed 7] [--delta 0.5] [--nu 0.2] [--out dir] [--no-svg]
//   lab validate-config file.json
//   lab list
//
// Exit status: 0 all verdicts pass, 2 a verdict failed, 1 execution error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "schauder/harness/config.hpp"
#include "schauder/harness/emit.hpp"
#include "schauder/harness/experiments.hpp"

namespace h = schauder::harness;

namespace {

int run(const std::string& id, const std::string& config_path, const std::string& resolutions,
        std::optional<int> ensemble, std::optional<std::uint64_t> seed, std::optional<double> delta,
        std::optional<double> nu, const std::string& out, bool svg) {
  h::ExperimentConfig c = config_path.empty() ? h::default_config(id) : h::load_config(config_path);
  if (!config_path.empty() && c.experiment != id)
    throw schauder::LabError("config is for experiment " + c.experiment + ", not " + id);
  if (!resolutions.empty()) c.resolutions = h::parse_resolutions(resolutions);
  if (ensemble) c.ensemble = *ensemble;
  if (seed) c.seed = *seed;
  if (delta) c.delta = *delta;
  if (nu) c.nu = *nu;
  if (!out.empty()) c.out = out;
  h::validate(c);

  const h::Report r = h::run_experiment(c);
  const auto files = h::emit(r, c.out, svg);
  for (const auto& s : r.series)
    for (const auto& a : s.aggregates)
      std::printf("%-16s n=%-5zu used=%-3zu max=%-12.6g median=%-12.6g control=%.6g\n", s.name.c_str(), a.resolution,
                  a.used, a.max_ratio, a.median_ratio, a.max_control);
  for (const auto& v : r.verdicts) std::printf("[%s] %s (%s)\n", v.pass ? "pass" : "FAIL", v.name.c_str(), v.detail.c_str());
  std::printf("wrote %s\n", files.front().parent_path().string().c_str());
  return r.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hoelder estimate laboratory"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write report.json, members.csv and plots");
  std::string id, config_path, resolutions, out;
  std::optional<int> ensemble;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta, nu;
  bool no_svg = false;
  run_cmd->add_option("experiment", id, "experiment id (see `lab list`)")->required();
  run_cmd->add_option("--config", config_path, "JSON config with exactly the experiment fields");
  run_cmd->add_option("--resolutions", resolutions, "comma-separated resolutions, e.g. 33,65,129");
  run_cmd->add_option("--ensemble", ensemble, "ensemble size");
  run_cmd->add_option("--seed", seed, "base seed; members use seed + i");
  run_cmd->add_option("--delta", delta, "Hoelder exponent in (0, 1)");
  run_cmd->add_option("--nu", nu, "ellipticity constant in (0, 1]");
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_flag("--no-svg", no_svg, "skip the SVG plots");

  auto* val_cmd = app.add_subcommand("validate-config", "check a config file and print it normalized");
  std::string val_path;
  val_cmd->add_option("path", val_path, "config file")->required();

  auto* list_cmd = app.add_subcommand("list", "print experiment ids and the estimate each one probes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*list_cmd) {
      for (const char* e : h::kExperimentIds) std::printf("%-3s %s\n", e, h::experiment_description(e));
      return 0;
    }
    if (*val_cmd) {
      const auto c = h::load_config(val_path);
      std::cout << h::to_json(c).dump(2) << "\n";
      return 0;
    }
    return run(id, config_path, resolutions, ensemble, seed, delta, nu, out, !no_svg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lab: %s\n", e.what());
    return 1;
  }
}
