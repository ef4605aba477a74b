#pragma once

// Closed-form threshold algebra for the parameter-based reference: slew
// demand versus actuator slew capacity, the required-command realizability
// check, and minimum-conservatism tuning of the stiffness range.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "vimpc/core.hpp"
#include "vimpc/hop1d.hpp"

namespace vimpc {

enum class Verdict { Realizable, FalselyFeasible };

inline const char* to_string(Verdict v) {
  return v == Verdict::Realizable ? "realizable" : "falsely_feasible";
}

/// Slew demand k_max^2 T / (2 m): the brisk-hopping (2 v_td / T >> g) form.
inline double slew_demand_simplified(const TaskParams1D& p) { return p.k_max * p.k_max * p.T / (2.0 * p.m); }

/// Slew demand k_max^2 v_td / F_const at middle-regime entry with entry speed v_td.
inline double slew_demand_exact(const TaskParams1D& p) { return p.k_max * p.k_max * p.v_td / constant_force(p); }

/// Largest stiffness rate the actuator can produce, omega_s (k_max - k_min).
inline double slew_capacity(const TaskParams1D& p) { return p.omega_s * (p.k_max - p.k_min); }

/// Below this alpha no upper bound k_max' <= k_max makes the reference realizable.
inline double infeasibility_alpha(const TaskParams1D& p) {
  return 4.0 * p.k_min * p.v_td * p.T / constant_force(p);
}

/// Required command k_ref + k_ref'/omega_s along the parameter-based
/// prediction, with out-of-range statistics.
///
/// Out-of-range time only counts runs of at least two consecutive grid samples;
/// a run of n samples contributes (n - 1) * dt.
struct RequiredCommandProfile {
  std::vector<double> times;
  std::vector<double> k_cmd;
  double min_command = 0.0;
  double max_command = 0.0;
  double time_below = 0.0;  // k_cmd < k_min [s]
  double time_above = 0.0;  // k_cmd > k_max [s]
  std::size_t longest_run = 0;  // samples

  double time_out_of_bounds() const { return time_below + time_above; }
};

inline RequiredCommandProfile required_command_profile(const TaskParams1D& params,
                                                       const IntegratorSettings& settings = stance_settings()) {
  validate(params);
  const auto consts = derive_constants(params);
  const auto pred = predict(params, ParamBased{}, settings);

  RequiredCommandProfile prof;
  const std::size_t n = pred.grid_size();
  prof.times.assign(pred.times.begin(), pred.times.begin() + static_cast<std::ptrdiff_t>(n));
  prof.k_cmd.resize(n);
  prof.min_command = std::numeric_limits<double>::infinity();
  prof.max_command = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    prof.k_cmd[i] = precompensated_command(params, pred.z[i], pred.z_dot[i], consts, params.k_max);
    prof.min_command = std::min(prof.min_command, prof.k_cmd[i]);
    prof.max_command = std::max(prof.max_command, prof.k_cmd[i]);
  }

  // -1 below, +1 above, 0 inside
  auto side = [&](double k) { return k < params.k_min ? -1 : (k > params.k_max ? 1 : 0); };
  std::size_t i = 0;
  while (i < n) {
    const int s = side(prof.k_cmd[i]);
    std::size_t j = i + 1;
    while (j < n && side(prof.k_cmd[j]) == s) ++j;
    const std::size_t run = j - i;
    if (s != 0 && run >= 2) {
      const double span = prof.times[j - 1] - prof.times[i];
      (s < 0 ? prof.time_below : prof.time_above) += span;
      prof.longest_run = std::max(prof.longest_run, run);
    }
    i = j;
  }
  return prof;
}

struct ThresholdReport {
  double alpha = 0.0;
  double D_simplified = 0.0;  // [N/(m s)]
  double D_exact = 0.0;       // [N/(m s)]
  double R = 0.0;             // [N/(m s)]
  double rho = 0.0;
  double alpha_crit = 0.0;
  double alpha_infeas = 0.0;
  double saturation_gap = 0.0;  // [N/m]
  double entry_command = 0.0;   // k_max - D_simplified / omega_s [N/m]
  RequiredCommandProfile profile;
  Verdict verdict = Verdict::Realizable;
};

inline ThresholdReport threshold_report(const TaskParams1D& params,
                                        const IntegratorSettings& settings = stance_settings()) {
  validate(params);
  ThresholdReport r;
  r.alpha = params.alpha();
  r.D_simplified = slew_demand_simplified(params);
  r.D_exact = slew_demand_exact(params);
  r.R = slew_capacity(params);
  r.rho = r.D_simplified / r.R;
  r.alpha_crit = critical_alpha(params);
  r.alpha_infeas = infeasibility_alpha(params);
  r.saturation_gap = r.D_simplified / params.omega_s - (params.k_max - params.k_min);
  r.entry_command = params.k_max - r.D_simplified / params.omega_s;
  r.profile = required_command_profile(params, settings);
  r.verdict = r.profile.time_out_of_bounds() > 0.0 ? Verdict::FalselyFeasible : Verdict::Realizable;
  return r;
}

// ---------------------------------------------------------------------------
// Conservative tuning

/// Larger root of k^2 - A k + A k_min = 0; absent when A < 4 k_min.
inline std::optional<double> larger_boundary_root(double A, double k_min) {
  if (A < 4.0 * k_min) return std::nullopt;
  return 0.5 * A * (1.0 + std::sqrt(1.0 - 4.0 * k_min / A));
}

/// A = omega_s F_const / v_td.
inline double boundary_coefficient(const TaskParams1D& p) { return p.omega_s * constant_force(p) / p.v_td; }

/// Least-conservative upper stiffness bound with k_min' = k_min, truncated at
/// k_max. Absent below alpha_infeas.
inline std::optional<double> minimum_conservatism_cap(const TaskParams1D& p) {
  const double A = boundary_coefficient(p);
  // omega_s = alpha / T does not round-trip exactly, so alpha_infeas itself
  // may land a few ulps short of A = 4 k_min.
  if (A < 4.0 * p.k_min * (1.0 - 1e-12)) return std::nullopt;
  const double disc = std::max(0.0, 1.0 - 4.0 * p.k_min / A);
  return std::min(p.k_max, 0.5 * A * (1.0 + std::sqrt(disc)));
}

/// Whether the restricted range [k_min', k_max'] passes D'(k_max') <= omega_s (k_max' - k_min'),
/// with D' in the exact entry-speed form.
inline bool restriction_realizable(const TaskParams1D& p, double k_min_prime, double k_max_prime) {
  const double demand = k_max_prime * k_max_prime * p.v_td / constant_force(p);
  return demand <= p.omega_s * (k_max_prime - k_min_prime);
}

struct Reach {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

struct ConservativePoint {
  double alpha = 0.0;
  double A = 0.0;
  std::optional<double> k_max_prime;
  std::optional<double> conservatism_ratio;
  std::optional<double> J_param;         // J / J_ideal
  std::optional<double> J_conservative;  // J / J_ideal
  std::optional<double> J_state;         // J / J_ideal
};

struct ConservativeReport {
  double alpha_crit = 0.0;
  double alpha_infeas = 0.0;
  double J_ideal = 0.0;
  std::vector<ConservativePoint> points;
  Reach reach_state;
  Reach reach_conservative;
  Reach reach_param;
};

struct ConservativeOptions {
  bool with_costs = true;
  IntegratorSettings settings = stance_settings();
};

inline ConservativeReport conservative_report(const TaskParams1D& params, const std::vector<double>& alpha_grid,
                                              const ConservativeOptions& opts = {}) {
  validate(params);
  ConservativeReport rep;
  rep.alpha_crit = critical_alpha(params);
  rep.alpha_infeas = infeasibility_alpha(params);
  rep.J_ideal = ideal_cost(params);

  auto normalized_cost = [&](const TaskParams1D& p, const ControllerKind& kind) -> std::optional<double> {
    try {
      return rollout(p, kind, opts.settings).J_realized / rep.J_ideal;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  for (double alpha : alpha_grid) {
    const TaskParams1D p = params.with_alpha(alpha);
    ConservativePoint pt;
    pt.alpha = alpha;
    pt.A = boundary_coefficient(p);
    pt.k_max_prime = minimum_conservatism_cap(p);
    if (pt.k_max_prime) {
      pt.conservatism_ratio = (*pt.k_max_prime - params.k_min) / (params.k_max - params.k_min);
    }
    if (opts.with_costs) {
      pt.J_param = normalized_cost(p, ParamBased{});
      pt.J_state = normalized_cost(p, StiffnessAsState{});
      if (pt.k_max_prime) pt.J_conservative = normalized_cost(p, ConservativeParamBased{*pt.k_max_prime});
    }
    rep.points.push_back(pt);
  }

  if (!alpha_grid.empty()) {
    rep.reach_state = {alpha_grid.front(), alpha_grid.back()};
  }
  rep.reach_conservative = {rep.alpha_infeas, std::numeric_limits<double>::infinity()};
  rep.reach_param = {rep.alpha_crit, std::numeric_limits<double>::infinity()};
  return rep;
}

}  // namespace vimpc
