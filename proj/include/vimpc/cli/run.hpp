#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "vimpc/analysis.hpp"
#include "vimpc/cli/config.hpp"
#include "vimpc/cli/csv.hpp"
#include "vimpc/slip2d.hpp"
#include "vimpc/sweep.hpp"

namespace vimpc::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct NamedTable {
  std::string file;
  CsvTable table;
};

/// In-memory result of one experiment.
struct Artifacts {
  std::vector<NamedTable> tables;
  std::size_t warnings = 0;  // rows with failed computations
  std::vector<std::string> messages;
};

namespace detail {

inline void warn(Artifacts& a, std::string msg) {
  ++a.warnings;
  a.messages.push_back(std::move(msg));
}

inline Artifacts sweep1d(const ExperimentConfig& c) {
  Artifacts out;
  SweepConfig sc{c.alpha_grid.values(), c.v_td_ensemble, c.task, c.controllers, c.threads};
  const auto rows = run_sweep(sc);

  CsvTable t({"alpha", "v_td", "controller", "D_alpha", "dT_alpha", "J_over_Jideal"});
  for (const auto& r : rows) {
    t.row().add(r.alpha).add(r.v_td).add(controller_name(r.controller)).add(r.D_alpha).add(r.dT_alpha).add(
        r.J_over_Jideal);
    if (!r.error.empty()) {
      warn(out, "alpha=" + format_number(r.alpha) + " v_td=" + format_number(r.v_td) + " " +
                    controller_name(r.controller) + ": " + r.error);
    }
  }

  const double alpha_crit = critical_alpha(c.task);
  CsvTable s({"alpha", "controller", "D_median", "D_min", "D_max", "dT_median", "dT_min", "dT_max", "alpha_crit"});
  for (const auto& kind : c.controllers) {
    for (const auto& pt : ensemble_summary(rows, kind)) {
      s.row()
          .add(pt.alpha)
          .add(controller_name(kind))
          .add(pt.D_median)
          .add(pt.D_min)
          .add(pt.D_max)
          .add(pt.dT_median)
          .add(pt.dT_min)
          .add(pt.dT_max)
          .add(alpha_crit);
    }
  }
  out.tables.push_back({"sweep1d.csv", std::move(t)});
  out.tables.push_back({"sweep1d_summary.csv", std::move(s)});
  return out;
}

inline Artifacts robustness(const ExperimentConfig& c) {
  Artifacts out;
  RobustnessConfig rc;
  rc.base = c.task;
  rc.combos = c.combos;
  rc.v_td_ensemble = c.v_td_ensemble;
  rc.alpha_grid = c.alpha_grid.values();
  rc.threads = c.threads;
  const auto res = robustness_study(rc);

  CsvTable t({"combo", "m", "T", "k_min", "k_max", "alpha_crit", "alpha_50", "slope", "intercept", "r_squared",
              "proportionality"});
  std::optional<double> slope, intercept, r2, prop;
  if (res.fit) {
    slope = res.fit->slope;
    intercept = res.fit->intercept;
    r2 = res.fit->r_squared;
    prop = res.fit->proportionality;
  } else {
    warn(out, "fit: " + res.fit_error);
  }
  for (std::size_t i = 0; i < res.combos.size(); ++i) {
    const auto& cr = res.combos[i];
    t.row()
        .add(i)
        .add(cr.params.m)
        .add(cr.params.T)
        .add(cr.params.k_min)
        .add(cr.params.k_max)
        .add(cr.alpha_crit)
        .add(cr.alpha_50)
        .add(slope)
        .add(intercept)
        .add(r2)
        .add(prop);
    if (!cr.error.empty()) warn(out, "combo " + std::to_string(i) + ": " + cr.error);
  }
  out.tables.push_back({"robustness.csv", std::move(t)});
  return out;
}

inline Artifacts slip2d(const ExperimentConfig& c) {
  Artifacts out;
  SlipSweepConfig sc;
  sc.base = c.slip;
  sc.alpha_grid = c.alpha_grid.values();
  sc.angles_deg = c.angles_deg;
  sc.spot_angles_deg = c.spot_angles_deg;
  sc.spot_alphas = c.spot_alphas;
  sc.threads = c.threads;
  const auto rows = slip_sweep(sc);

  CsvTable t({"angle_deg", "alpha", "series", "D_2D", "dT_2D", "eta", "mu", "negative_vertical_force"});
  for (const auto& r : rows) {
    auto& row = t.row().add(r.angle_deg).add(r.alpha).add(r.series);
    if (r.observables) {
      row.add(r.observables->D_2D)
          .add(r.observables->dT_2D)
          .add(r.observables->eta)
          .add(c.slip.mu)
          .add(r.observables->negative_vertical_force);
    } else {
      row.add(std::optional<double>{}).add(std::optional<double>{}).add(std::optional<double>{}).add(c.slip.mu).add(
          "");
      warn(out, "angle=" + format_number(r.angle_deg) + " alpha=" + format_number(r.alpha) + ": " + r.error);
    }
  }
  out.tables.push_back({"slip2d.csv", std::move(t)});
  return out;
}

inline Artifacts conservative(const ExperimentConfig& c) {
  Artifacts out;
  ConservativeOptions opts;
  opts.with_costs = c.with_costs;
  const auto rep = conservative_report(c.task, c.alpha_grid.values(), opts);

  auto finite = [](double v) { return std::isfinite(v) ? std::optional<double>(v) : std::nullopt; };
  CsvTable t({"alpha", "alpha_crit", "alpha_infeas", "A", "k_max_prime", "conservatism_ratio", "J_ideal", "J_param",
              "J_conservative", "J_state", "reach_state_lo", "reach_state_hi", "reach_conservative_lo",
              "reach_conservative_hi", "reach_param_lo", "reach_param_hi"});
  for (const auto& pt : rep.points) {
    t.row()
        .add(pt.alpha)
        .add(rep.alpha_crit)
        .add(rep.alpha_infeas)
        .add(pt.A)
        .add(pt.k_max_prime)
        .add(pt.conservatism_ratio)
        .add(rep.J_ideal)
        .add(pt.J_param)
        .add(pt.J_conservative)
        .add(pt.J_state)
        .add(rep.reach_state.lo)
        .add(finite(rep.reach_state.hi))
        .add(rep.reach_conservative.lo)
        .add(finite(rep.reach_conservative.hi))
        .add(rep.reach_param.lo)
        .add(finite(rep.reach_param.hi));
    if (c.with_costs) {
      if (!pt.J_param || !pt.J_state || (pt.k_max_prime && !pt.J_conservative)) {
        warn(out, "alpha=" + format_number(pt.alpha) + ": cost rollout failed");
      }
    }
  }
  out.tables.push_back({"conservative.csv", std::move(t)});
  return out;
}

inline Artifacts thresholds(const ExperimentConfig& c) {
  Artifacts out;
  const auto r = threshold_report(c.task.with_alpha(c.alpha));
  CsvTable t({"alpha", "alpha_crit", "alpha_infeas", "D_simplified", "D_exact", "R", "rho", "saturation_gap",
              "entry_command", "min_command", "max_command", "time_below", "time_above", "verdict"});
  t.row()
      .add(r.alpha)
      .add(r.alpha_crit)
      .add(r.alpha_infeas)
      .add(r.D_simplified)
      .add(r.D_exact)
      .add(r.R)
      .add(r.rho)
      .add(r.saturation_gap)
      .add(r.entry_command)
      .add(r.profile.min_command)
      .add(r.profile.max_command)
      .add(r.profile.time_below)
      .add(r.profile.time_above)
      .add(to_string(r.verdict));
  out.tables.push_back({"thresholds.csv", std::move(t)});
  return out;
}

}  // namespace detail

/// Runs the experiment and returns its tables without touching the filesystem.
inline Artifacts compute(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::Sweep1D: return detail::sweep1d(c);
    case Experiment::Robustness: return detail::robustness(c);
    case Experiment::Slip2D: return detail::slip2d(c);
    case Experiment::Conservative: return detail::conservative(c);
    case Experiment::Thresholds: return detail::thresholds(c);
  }
  throw ConfigError("unhandled experiment");
}

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::size_t rows = 0;
  std::size_t warnings = 0;
  std::vector<std::string> messages;
  double wall_clock_s = 0.0;
};

inline std::string manifest_text(const ExperimentConfig& c, const Artifacts& a, double wall_clock_s) {
  std::string m;
  auto line = [&](const std::string& k, const std::string& v) { m += k + ": " + v + "\n"; };
  line("experiment", to_string(c.experiment));
  line("artifact_version", kArtifactVersion);
  line("config", c.echo.dump());
  line("alpha_grid_lo", format_number(c.alpha_grid.lo));
  line("alpha_grid_hi", format_number(c.alpha_grid.hi));
  line("alpha_grid_points", std::to_string(c.alpha_grid.points));
  std::size_t rows = 0;
  std::string files;
  for (const auto& t : a.tables) {
    rows += t.table.size();
    files += (files.empty() ? "" : ",") + t.file;
    line("rows." + t.file, std::to_string(t.table.size()));
  }
  line("outputs", files);
  line("warnings", std::to_string(a.warnings));
  for (const auto& msg : a.messages) line("warning", msg);
  line("wall_clock_s", format_number(wall_clock_s));
  return m;
}

/// Computes the experiment and writes its CSV files plus manifest.txt into
/// c.output_dir.
inline RunSummary run(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const Artifacts a = compute(c);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  RunSummary s;
  for (const auto& t : a.tables) {
    t.table.write(dir / t.file);
    s.files.push_back(dir / t.file);
    s.rows += t.table.size();
  }
  const auto manifest = dir / "manifest.txt";
  std::ofstream f(manifest, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + manifest.string() + " for writing");
  f << manifest_text(c, a, elapsed);
  if (!f) throw IoError("failed writing " + manifest.string());
  s.files.push_back(manifest);
  s.warnings = a.warnings;
  s.messages = a.messages;
  s.wall_clock_s = elapsed;
  return s;
}

}  // namespace vimpc::cli
