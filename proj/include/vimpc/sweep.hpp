#pragma once

// Alpha sweeps over a touchdown-velocity ensemble, 50-percent crossing
// detection, and the log-log robustness regression.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vimpc/core.hpp"
#include "vimpc/hop1d.hpp"

namespace vimpc {

/// n log-spaced values from lo to hi, endpoints exact.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw ValidationError("log_grid needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Runs fn(i) for i in [0, n) on a small worker pool. Each index is handled
/// exactly once; callers write results into pre-sized slots.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct SweepConfig {
  std::vector<double> alpha_grid;
  std::vector<double> v_td_ensemble;
  TaskParams1D base_params;  // omega_s and v_td are overwritten per row
  std::vector<ControllerKind> controllers;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline void validate(const SweepConfig& c) {
  if (c.alpha_grid.empty() || c.v_td_ensemble.empty() || c.controllers.empty()) {
    throw ValidationError("sweep needs a non-empty alpha grid, velocity ensemble and controller list");
  }
  for (std::size_t i = 0; i < c.alpha_grid.size(); ++i) {
    if (!(c.alpha_grid[i] > 0.0) || (i > 0 && !(c.alpha_grid[i] > c.alpha_grid[i - 1]))) {
      throw ValidationError("alpha grid must be positive and strictly increasing");
    }
  }
  for (double v : c.v_td_ensemble) validate(c.base_params.with_v_td(v));
}

struct SweepRow {
  double alpha = 0.0;
  double v_td = 0.0;
  ControllerKind controller;
  std::optional<double> D_alpha;
  std::optional<double> dT_alpha;
  std::optional<double> J_over_Jideal;
  std::string error;  // empty on success
};

/// One row per (alpha, v_td, controller), ordered alpha-major, then v_td,
/// then controller in configuration order. A failed rollout leaves its
/// metrics empty and records the message; the sweep continues.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  validate(config);
  const std::size_t nv = config.v_td_ensemble.size();
  const std::size_t nc = config.controllers.size();
  std::vector<SweepRow> rows(config.alpha_grid.size() * nv * nc);
  parallel_for(
      rows.size(),
      [&](std::size_t idx) {
        const std::size_t ia = idx / (nv * nc);
        const std::size_t iv = (idx / nc) % nv;
        const std::size_t ic = idx % nc;
        SweepRow& row = rows[idx];
        row.alpha = config.alpha_grid[ia];
        row.v_td = config.v_td_ensemble[iv];
        row.controller = config.controllers[ic];
        const TaskParams1D p = config.base_params.with_v_td(row.v_td).with_alpha(row.alpha);
        try {
          const auto r = rollout(p, row.controller);
          row.D_alpha = r.D_alpha;
          row.dT_alpha = r.dT_alpha;
          row.J_over_Jideal = r.J_realized / ideal_cost(p);
        } catch (const Error& e) {
          row.error = e.what();
        }
      },
      config.threads);
  return rows;
}

/// Ensemble statistics of one controller at one alpha.
struct EnsemblePoint {
  double alpha = 0.0;
  std::optional<double> D_median, D_min, D_max;
  std::optional<double> dT_median, dT_min, dT_max;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Median and min/max envelope across the velocity ensemble, per alpha.
inline std::vector<EnsemblePoint> ensemble_summary(const std::vector<SweepRow>& rows, const ControllerKind& kind) {
  std::vector<EnsemblePoint> out;
  for (std::size_t i = 0; i < rows.size();) {
    const double alpha = rows[i].alpha;
    std::vector<double> d, dt;
    std::size_t j = i;
    for (; j < rows.size() && rows[j].alpha == alpha; ++j) {
      if (rows[j].controller != kind) continue;
      if (rows[j].D_alpha) d.push_back(*rows[j].D_alpha);
      if (rows[j].dT_alpha) dt.push_back(*rows[j].dT_alpha);
    }
    EnsemblePoint pt;
    pt.alpha = alpha;
    if (!d.empty()) {
      pt.D_median = detail::median(d);
      pt.D_min = *std::min_element(d.begin(), d.end());
      pt.D_max = *std::max_element(d.begin(), d.end());
    }
    if (!dt.empty()) {
      pt.dT_median = detail::median(dt);
      pt.dT_min = *std::min_element(dt.begin(), dt.end());
      pt.dT_max = *std::max_element(dt.begin(), dt.end());
    }
    out.push_back(pt);
    i = j;
  }
  return out;
}

/// Alpha at which the deviation series crosses 0.5, by linear interpolation
/// in (log alpha, D) between the bracketing samples. With several crossings
/// the largest-alpha one wins. Missing values are skipped.
inline double alpha_50(const std::vector<double>& alphas, const std::vector<std::optional<double>>& deviation) {
  std::vector<double> a, d;
  for (std::size_t i = 0; i < alphas.size() && i < deviation.size(); ++i) {
    if (deviation[i]) {
      a.push_back(alphas[i]);
      d.push_back(*deviation[i]);
    }
  }
  constexpr double level = 0.5;
  for (std::size_t i = a.size(); i-- > 1;) {
    const double d0 = d[i - 1];
    const double d1 = d[i];
    if ((d0 - level) * (d1 - level) <= 0.0 && d0 != d1) {
      const double f = (level - d0) / (d1 - d0);
      const double la = std::log(a[i - 1]);
      const double lb = std::log(a[i]);
      return std::exp(la + f * (lb - la));
    }
  }
  throw NoCrossing("deviation series never crosses 0.5");
}

inline double alpha_50(const std::vector<double>& alphas, const std::vector<double>& deviation) {
  return alpha_50(alphas, std::vector<std::optional<double>>(deviation.begin(), deviation.end()));
}

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double proportionality = 0.0;  // exp(mean(log y - log x))
  std::size_t points = 0;
};

/// Ordinary least squares of log y on log x, plus the slope-one
/// proportionality constant.
inline RegressionResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 3) throw UnderdeterminedFit("log-log fit needs at least 3 points (got " + std::to_string(n) + ")");
  std::vector<double> lx(n), ly(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw UnderdeterminedFit("log-log fit needs distinct x values");
  RegressionResult r;
  r.points = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  r.proportionality = std::exp(my - mx);
  return r;
}

/// One task variant of the robustness study. v_td comes from the ensemble.
struct RobustnessCombo {
  double m = 1.0;
  double T = 0.3;
  double k_min = 50.0;
  double k_max = 500.0;
};

/// Ten variants over m in [0.5, 2] kg, T in [0.2, 0.4] s, k_min in [50, 100] N/m,
/// k_max in [300, 800] N/m. alpha_crit targets are log-spaced over [9.5, 53];
/// k_min and k_max sit on permuted ten-level strata, m is the unused stratum
/// level that puts T closest to 0.3 s, and T is solved from the target.
inline std::vector<RobustnessCombo> default_robustness_combos() {
  return {
      {2.00, 0.233, 61.0, 633.0}, {1.83, 0.295, 94.0, 356.0}, {1.67, 0.236, 78.0, 744.0},
      {1.33, 0.293, 50.0, 467.0}, {1.00, 0.309, 89.0, 300.0}, {1.50, 0.291, 67.0, 800.0},
      {0.83, 0.278, 100.0, 522.0}, {1.17, 0.336, 56.0, 689.0}, {0.50, 0.291, 83.0, 411.0},
      {0.67, 0.327, 72.0, 578.0},
  };
}

struct ComboResult {
  TaskParams1D params;
  double alpha_crit = 0.0;
  std::optional<double> alpha_50;
  std::string error;
};

struct RobustnessResult {
  std::vector<ComboResult> combos;
  std::optional<RegressionResult> fit;
  std::string fit_error;
};

struct RobustnessConfig {
  TaskParams1D base;  // g, l0 and defaults for the combo fields
  std::vector<RobustnessCombo> combos = default_robustness_combos();
  std::vector<double> v_td_ensemble{1.5, 2.0, 2.5};
  std::vector<double> alpha_grid = log_grid(0.1, 316.0, 36);
  unsigned threads = 0;
};

/// Per combo: parameter-based sweep over the ensemble, alpha_50 of the
/// ensemble-median deviation series. Combos without a crossing are reported
/// and left out of the fit.
inline RobustnessResult robustness_study(const RobustnessConfig& cfg) {
  RobustnessResult out;
  for (const auto& c : cfg.combos) {
    ComboResult cr;
    cr.params = cfg.base;
    cr.params.m = c.m;
    cr.params.T = c.T;
    cr.params.k_min = c.k_min;
    cr.params.k_max = c.k_max;
    try {
      cr.alpha_crit = derive_constants(cr.params).alpha_crit;
      SweepConfig sc;
      sc.alpha_grid = cfg.alpha_grid;
      sc.v_td_ensemble = cfg.v_td_ensemble;
      sc.base_params = cr.params;
      sc.controllers = {ParamBased{}};
      sc.threads = cfg.threads;
      const auto summary = ensemble_summary(run_sweep(sc), ParamBased{});
      std::vector<double> a;
      std::vector<std::optional<double>> d;
      for (const auto& pt : summary) {
        a.push_back(pt.alpha);
        d.push_back(pt.D_median);
      }
      cr.alpha_50 = alpha_50(a, d);
    } catch (const Error& e) {
      cr.error = e.what();
    }
    out.combos.push_back(cr);
  }
  std::vector<double> x, y;
  for (const auto& cr : out.combos) {
    if (cr.alpha_50) {
      x.push_back(cr.alpha_crit);
      y.push_back(*cr.alpha_50);
    }
  }
  try {
    out.fit = fit_loglog(x, y);
  } catch (const UnderdeterminedFit& e) {
    out.fit_error = e.what();
  }
  return out;
}

}  // namespace vimpc
