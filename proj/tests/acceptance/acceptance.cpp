// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vimpc/cli/config.hpp"
#include "vimpc/cli/run.hpp"
#include "vimpc/vimpc.hpp"

using namespace vimpc;

namespace {

int failures = 0;
int checks = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  ++checks;
  if (!ok) ++failures;
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Independent oracle: alpha where omega_s F_const / v_td = 4 k_min, by bisection.
double infeasibility_oracle(const TaskParams1D& p) {
  double lo = 1e-6, hi = 1e6;
  for (int i = 0; i < 300; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double F = p.m * (2.0 * p.v_td / p.T + p.g);
    ((mid / p.T) * F / p.v_td < 4.0 * p.k_min ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

void analytic_thresholds() {
  const TaskParams1D p;
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha_crit = derive_constants(p).alpha_crit;
  const double alpha_infeas = infeasibility_alpha(p);
  const auto root = larger_boundary_root(4.0 * p.k_min, p.k_min);
  const auto cap = minimum_conservatism_cap(p.with_alpha(alpha_infeas));
  const double elapsed = seconds_since(t0);

  report(std::abs(alpha_crit - 25.0) <= 1e-12, "thresholds.alpha_crit", fmt("%.15g (25 +/- 1e-12)", alpha_crit));
  const double oracle = infeasibility_oracle(p);
  report(std::abs(alpha_infeas - 5.185) <= 0.01 && std::abs(alpha_infeas - oracle) <= 1e-9,
         "thresholds.alpha_infeas", fmt("%.6f, bisection oracle %.6f (5.185 +/- 0.01)", alpha_infeas, oracle));
  const double ratio = alpha_crit / alpha_infeas;
  report(std::abs(ratio - 4.82) <= 0.05, "thresholds.crit_over_infeas", fmt("%.4f (4.82 +/- 0.05)", ratio));
  report(root && *root == 2.0 * p.k_min && cap && std::abs(*cap - 100.0) <= 1e-6, "thresholds.k_max_prime_at_zero_disc",
         fmt("root %.17g, via task %.12g (100 exactly)", root ? *root : NAN, cap ? *cap : NAN));
  const double cons = cap ? (*cap - p.k_min) / (p.k_max - p.k_min) : NAN;
  report(std::abs(cons - 50.0 / 450.0) <= 1e-6, "thresholds.conservatism_ratio_at_zero_disc",
         fmt("%.8f (0.1111 +/- 1e-6)", cons));
  report(elapsed < 1e-3, "thresholds.runtime", fmt("%.3g s (< 1 ms)", elapsed));
}

void sweep_1d() {
  SweepConfig cfg;
  cfg.alpha_grid = log_grid(0.1, 316.0, 36);
  cfg.v_td_ensemble = {1.5, 2.0, 2.5};
  cfg.controllers = {ParamBased{}, StiffnessAsState{}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(cfg);
  const double elapsed = seconds_since(t0);

  const double inf = std::numeric_limits<double>::infinity();
  double d_hi = 0.0, d_lo = inf, dt_hi = 0.0, dt_lo = inf, state_d = 0.0, state_dt = 0.0, mono = -inf;
  bool complete = rows.size() == 36u * 3u * 2u;
  for (const auto& r : rows) {
    if (!r.D_alpha || !r.dT_alpha) {
      complete = false;
      continue;
    }
    if (std::holds_alternative<StiffnessAsState>(r.controller)) {
      state_d = std::max(state_d, *r.D_alpha);
      state_dt = std::max(state_dt, *r.dT_alpha);
      continue;
    }
    if (r.alpha == 316.0) {
      d_hi = std::max(d_hi, *r.D_alpha);
      dt_hi = std::max(dt_hi, *r.dT_alpha);
    }
    if (r.alpha == 0.1) d_lo = std::min(d_lo, *r.D_alpha);
    if (r.alpha <= 0.3) dt_lo = std::min(dt_lo, *r.dT_alpha);
  }
  for (double v : cfg.v_td_ensemble) {
    double prev = NAN;
    for (const auto& r : rows) {
      if (r.v_td != v || !std::holds_alternative<ParamBased>(r.controller) || !r.D_alpha) continue;
      if (!std::isnan(prev)) mono = std::max(mono, *r.D_alpha - prev);
      prev = *r.D_alpha;
    }
  }
  report(complete, "sweep1d.rows_complete", fmt("%.0f rows without failures (216)", static_cast<double>(rows.size())));
  report(d_hi <= 0.05, "sweep1d.param_D_at_316", fmt("max over ensemble %.4f (<= 0.05)", d_hi));
  report(d_lo >= 0.8, "sweep1d.param_D_at_0.1", fmt("min over ensemble %.4f (>= 0.8)", d_lo));
  report(dt_hi <= 0.02, "sweep1d.param_dT_at_316", fmt("max over ensemble %.4f (<= 0.02)", dt_hi));
  report(dt_lo >= 0.5, "sweep1d.param_dT_at_alpha_le_0.3", fmt("min over ensemble %.4f (>= 0.5)", dt_lo));
  report(state_d <= 1e-6 && state_dt <= 1e-6, "sweep1d.state_zero_deviation",
         fmt("max D %.3g, max dT %.3g (<= 1e-6)", state_d, state_dt));
  report(mono <= 0.02, "sweep1d.param_D_monotone", fmt("largest increase with alpha %.4g (slack 0.02)", mono));
  report(elapsed < 60.0, "sweep1d.runtime", fmt("%.3g s (< 60 s)", elapsed));
}

void robustness() {
  RobustnessConfig cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = robustness_study(cfg);
  const double elapsed = seconds_since(t0);

  std::size_t below = 0, crossed = 0;
  for (const auto& c : res.combos) {
    if (!c.alpha_50) continue;
    ++crossed;
    if (*c.alpha_50 < c.alpha_crit) ++below;
  }
  const bool fit = res.fit.has_value();
  const double r2 = fit ? res.fit->r_squared : NAN;
  const double slope = fit ? res.fit->slope : NAN;
  const double prop = fit ? res.fit->proportionality : NAN;
  report(fit && r2 >= 0.95, "robustness.r_squared", fmt("%.4f (>= 0.95)", r2));
  report(fit && slope >= 0.85 && slope <= 1.15, "robustness.slope", fmt("%.4f ([0.85, 1.15])", slope));
  report(fit && prop >= 0.5 && prop <= 0.85, "robustness.proportionality", fmt("%.4f ([0.5, 0.85])", prop));
  report(crossed == 10 && below == 10, "robustness.alpha50_below_alpha_crit",
         fmt("%.0f of %.0f combos (all 10)", static_cast<double>(below), static_cast<double>(res.combos.size())));
  report(elapsed < 300.0, "robustness.runtime", fmt("%.3g s (< 300 s)", elapsed));
}

void slip() {
  const SlipParams base;
  SlipSweepConfig cfg;
  cfg.base = base;
  cfg.alpha_grid = log_grid(0.1, 316.0, 36);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = slip_sweep(cfg);
  const double d_316 = slip_rollout(base.with_alpha(316.0), ParamBased{}).observables.D_2D;
  const double d_03 = slip_rollout(base.with_alpha(0.3), ParamBased{}).observables.D_2D;
  const double elapsed = seconds_since(t0);

  report(std::abs(d_316 - 0.03) <= 0.02, "slip2d.D_15deg_alpha316", fmt("%.4f (0.03 +/- 0.02)", d_316));
  report(std::abs(d_03 - 1.9) <= 0.3, "slip2d.D_15deg_alpha0.3", fmt("%.4f (1.9 +/- 0.3)", d_03));

  double spot05 = NAN, spot10 = NAN;
  bool complete = true;
  for (const auto& r : rows) {
    if (!r.observables) complete = false;
    if (r.series == "spot" && r.observables) (r.alpha == 0.5 ? spot05 : spot10) = r.observables->D_2D;
  }
  report(complete, "slip2d.rows_complete", fmt("%.0f rows without failures (74)", static_cast<double>(rows.size())));
  report(std::abs(spot05 - 1.86) <= 0.3, "slip2d.D_30deg_alpha0.5", fmt("%.4f (1.86 +/- 0.3)", spot05));
  report(std::abs(spot10 - 1.79) <= 0.3, "slip2d.D_30deg_alpha1.0", fmt("%.4f (1.79 +/- 0.3)", spot10));

  double eta_max_all = 0.0, dt_max = 0.0;
  for (double deg : {15.0, 20.0, 30.0}) {
    const double expected = std::tan(deg * std::numbers::pi / 180.0);
    double lo = INFINITY, hi = -INFINITY, err = 0.0;
    for (const auto& r : rows) {
      if (r.angle_deg != deg || !r.observables) continue;
      const double eta = r.observables->eta;
      lo = std::min(lo, eta);
      hi = std::max(hi, eta);
      err = std::max(err, std::abs(eta - expected));
      eta_max_all = std::max(eta_max_all, eta);
      dt_max = std::max(dt_max, r.observables->dT_2D);
    }
    char name[64];
    std::snprintf(name, sizeof name, "slip2d.eta_vs_tan_%.0fdeg", deg);
    report(err <= 0.05, name, fmt("max |eta - %.4f| = %.4f (<= 0.05)", expected, err));
    if (deg != 30.0) {
      std::snprintf(name, sizeof name, "slip2d.eta_flat_%.0fdeg", deg);
      report(hi - lo <= 0.05, name, fmt("range %.3g (<= 0.05)", hi - lo));
    }
  }
  report(eta_max_all < base.mu, "slip2d.eta_below_mu", fmt("max eta %.4f (< %.1f)", eta_max_all, base.mu));
  report(dt_max >= 0.5, "slip2d.max_timing_deviation", fmt("%.4f (>= 0.5)", dt_max));
  report(elapsed < 120.0, "slip2d.runtime", fmt("%.3g s (< 120 s)", elapsed));
}

void realizability() {
  const TaskParams1D p;
  const double alpha_crit = critical_alpha(p);
  const double alpha_infeas = infeasibility_alpha(p);
  const auto grid = log_grid(0.1, 316.0, 36);

  std::size_t tested = 0, flagged = 0;
  for (double a : grid) {
    if (!(a < 0.9 * alpha_crit)) continue;
    ++tested;
    const auto prof = required_command_profile(p.with_alpha(a));
    if (prof.time_out_of_bounds() > 0.0 && prof.longest_run >= 2) ++flagged;
  }
  report(tested > 0 && flagged == tested, "realizability.out_of_bounds_below_0.9_alpha_crit",
         fmt("%.0f of %.0f grid points flagged", static_cast<double>(flagged), static_cast<double>(tested)));

  std::size_t subgrid_alphas = 0, realizable = 0;
  for (double a : grid) {
    if (!(a < alpha_infeas)) continue;
    ++subgrid_alphas;
    const TaskParams1D q = p.with_alpha(a);
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const double lo = p.k_min + (p.k_max - p.k_min) * i / 19.0;
        const double hi = p.k_min + (p.k_max - p.k_min) * j / 19.0;
        if (hi > lo && restriction_realizable(q, lo, hi)) ++realizable;
      }
    }
  }
  report(subgrid_alphas > 0 && realizable == 0, "realizability.corollary_floor",
         fmt("%.0f realizable subintervals over %.0f alphas below alpha_infeas (0)", static_cast<double>(realizable),
             static_cast<double>(subgrid_alphas)));

  double worst = 0.0;
  for (double a : grid) {
    const auto r = threshold_report(p.with_alpha(a));
    const double oracle = (p.k_max - p.k_min) * (alpha_crit / a - 1.0);
    worst = std::max(worst, std::abs(r.saturation_gap - oracle));
  }
  report(worst <= 1e-9, "realizability.saturation_gap_formula", fmt("max abs error %.3g (<= 1e-9)", worst));
}

void determinism() {
  using namespace vimpc::cli;
  std::size_t identical = 0, total = 0;
  for (auto e : {Experiment::Sweep1D, Experiment::Robustness, Experiment::Slip2D, Experiment::Conservative,
                 Experiment::Thresholds}) {
    const auto cfg = default_config(e);
    const auto a = compute(cfg);
    const auto b = compute(cfg);
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
      ++total;
      if (i < b.tables.size() && a.tables[i].table.str() == b.tables[i].table.str()) ++identical;
    }
  }
  report(total > 0 && identical == total, "determinism.csv_bytes",
         fmt("%.0f of %.0f tables byte-identical across runs", static_cast<double>(identical),
             static_cast<double>(total)));
}

}  // namespace

int main() {
  try {
    analytic_thresholds();
    sweep_1d();
    robustness();
    slip();
    realizability();
    determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance.aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of %d criteria passed\n", checks - failures, checks);
  return failures == 0 ? 0 : 1;
}
