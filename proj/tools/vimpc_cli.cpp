#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vimpc/cli/config.hpp"
#include "vimpc/cli/run.hpp"

namespace {

const char* describe(vimpc::cli::Experiment e) {
  using vimpc::cli::Experiment;
  switch (e) {
    case Experiment::Sweep1D: return "1D deviation sweep over alpha and touchdown velocity";
    case Experiment::Robustness: return "alpha_50 versus alpha_crit over task variants";
    case Experiment::Slip2D: return "planar SLIP deviation and friction-ratio sweep";
    case Experiment::Conservative: return "minimum-conservatism stiffness caps and costs";
    case Experiment::Thresholds: return "slew demand, capacity and required-command verdict";
  }
  return "";
}

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::size_t> grid_points;
  bool quiet = false;
};

int execute(vimpc::cli::Experiment experiment, const Options& opt) {
  using namespace vimpc::cli;
  ExperimentConfig cfg;
  try {
    cfg = opt.config.empty() ? default_config(experiment) : load_config(opt.config);
    if (cfg.experiment != experiment) {
      throw vimpc::ConfigError(std::string("config is for '") + to_string(cfg.experiment) + "', not '" +
                               to_string(experiment) + "'");
    }
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    if (opt.grid_points) {
      cfg.alpha_grid.points = *opt.grid_points;
      validate(cfg);
    }
  } catch (const vimpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vimpc::ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto summary = run(cfg);
    if (!opt.quiet) {
      std::cout << to_string(experiment) << ": " << summary.rows << " rows -> " << cfg.output_dir << " ("
                << format_number(summary.wall_clock_s) << " s, " << summary.warnings << " warnings)\n";
    }
    for (const auto& msg : summary.messages) std::cerr << "warning: " << msg << "\n";
    return summary.warnings ? kExitCompute : 0;
  } catch (const vimpc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using vimpc::cli::Experiment;
  CLI::App app{"Actuator-lag mismatch experiments for stiffness-modulated hopping"};
  app.require_subcommand(1);

  Options opt;
  std::optional<Experiment> chosen;
  for (auto e : {Experiment::Sweep1D, Experiment::Robustness, Experiment::Slip2D, Experiment::Conservative,
                 Experiment::Thresholds}) {
    auto* sub = app.add_subcommand(vimpc::cli::to_string(e), describe(e));
    sub->add_option("--config", opt.config, "JSON config file (defaults to nominal parameters)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_option("--grid-points", opt.grid_points, "Number of alpha grid points")->check(CLI::Range(2, 100000));
    sub->add_flag("--quiet", opt.quiet, "Suppress the summary line");
    sub->callback([&chosen, e] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  return execute(*chosen, opt);
}
