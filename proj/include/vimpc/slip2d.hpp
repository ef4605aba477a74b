#pragma once

// Planar spring-loaded inverted pendulum stance with a pinned foot and a
// radial leg spring of lagged stiffness.
//
//   m x'' = k c u_x
//   m y'' = k c u_y - m g
//
// with leg length L = |r - r_foot|, compression c = l0 - L and unit vector u
// from foot to mass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vimpc/core.hpp"
#include "vimpc/hop1d.hpp"
#include "vimpc/integrate.hpp"
#include "vimpc/sweep.hpp"

namespace vimpc {

struct SlipParams {
  double m = 1.0;
  double g = 9.81;
  double l0 = 0.5;
  double k_min = 500.0;
  double k_max = 4000.0;
  double mu = 0.7;
  double v_forward = 1.0;
  double alpha_td = 15.0 * std::numbers::pi / 180.0;  // touchdown angle from vertical [rad]
  double h_drop = 0.05;
  double omega_s = 25.0 / 0.15;
  double T_nominal = 0.15;  // timescale defining alpha [s]

  double alpha() const { return omega_s * T_nominal; }

  SlipParams with_alpha(double alpha) const {
    SlipParams p = *this;
    p.omega_s = alpha / T_nominal;
    return p;
  }

  SlipParams with_angle_deg(double deg) const {
    SlipParams p = *this;
    p.alpha_td = deg * std::numbers::pi / 180.0;
    return p;
  }

  bool operator==(const SlipParams&) const = default;
};

inline const SlipParams& validate(const SlipParams& p) {
  detail::require_positive(p.m, "m");
  detail::require_positive(p.g, "g");
  detail::require_positive(p.l0, "l0");
  detail::require_positive(p.mu, "mu");
  detail::require_positive(p.h_drop, "h_drop");
  detail::require_positive(p.omega_s, "omega_s");
  detail::require_positive(p.T_nominal, "T_nominal");
  detail::require_positive(p.k_min, "k_min");
  if (!(p.k_min < p.k_max)) throw DegenerateRange("k_min must be < k_max");
  if (!(p.alpha_td > 0.0 && p.alpha_td < std::numbers::pi / 2.0)) {
    throw ValidationError("alpha_td must lie in (0, pi/2)");
  }
  if (!(p.v_forward >= 0.0)) throw ValidationError("v_forward must be >= 0");
  return p;
}

struct SlipState {
  double x = 0.0;
  double y = 0.0;
  double x_dot = 0.0;
  double y_dot = 0.0;
  double k = 0.0;
  double x_foot = 0.0;
};

struct LegGeometry {
  double L = 0.0;
  double c = 0.0;
  double u_x = 0.0;
  double u_y = 0.0;
};

inline LegGeometry leg_geometry(double x, double y, double x_foot, double l0) {
  LegGeometry g;
  g.L = std::hypot(x - x_foot, y);
  g.c = l0 - g.L;
  g.u_x = (x - x_foot) / g.L;
  g.u_y = y / g.L;
  return g;
}

/// Reference force level 2.5 m g of the planar schedule.
inline double slip_force_constant(const SlipParams& p) { return 2.5 * p.m * p.g; }

inline double k_ref2D(double c, const SlipParams& p, double k_cap) {
  if (c <= 0.0) return k_cap;
  return std::min(k_cap, slip_force_constant(p) / c);
}

inline double k_ref2D(double c, const SlipParams& p) { return k_ref2D(c, p, p.k_max); }

/// Touchdown with the mass at x = 0, the leg at alpha_td from vertical and the
/// foot ahead of the mass.
inline SlipState touchdown_state(const SlipParams& p) {
  SlipState s;
  s.x = 0.0;
  s.y = p.l0 * std::cos(p.alpha_td);
  s.x_foot = p.l0 * std::sin(p.alpha_td);
  s.x_dot = p.v_forward;
  s.y_dot = -std::sqrt(2.0 * p.g * p.h_drop);
  s.k = k_ref2D(0.0, p);
  return s;
}

struct SlipTrajectory {
  std::vector<double> times;
  std::vector<double> x, y, x_dot, y_dot, k, c;
  double x_foot = 0.0;
  double T_liftoff = 0.0;

  std::size_t grid_size() const { return times.empty() ? 0 : times.size() - 1; }
  double max_c() const { return c.empty() ? 0.0 : *std::max_element(c.begin(), c.end()); }
};

struct Observables2D {
  double D_2D = 0.0;
  double dT_2D = 0.0;
  double eta = 0.0;
  bool negative_vertical_force = false;  // u_y <= 0 seen during realized stance
};

struct SlipRollout {
  SlipTrajectory predicted;
  SlipTrajectory realized;
  Observables2D observables;
};

namespace detail {

template <std::size_t N>
TerminalEvent<N> slip_liftoff_event(double x_foot, double l0) {
  TerminalEvent<N> ev;
  ev.value = [=](double, const State<N>& s) { return leg_geometry(s[0], s[1], x_foot, l0).c; };
  ev.armed = [=](double t, const State<N>& s) {
    return liftoff_armed(t, leg_geometry(s[0], s[1], x_foot, l0).c);
  };
  ev.direction = EventDirection::Falling;
  return ev;
}

template <std::size_t N>
SlipTrajectory to_trajectory(const SampledSolution<N>& sol, const SlipParams& p, double x_foot,
                             auto&& stiffness_of) {
  SlipTrajectory traj;
  traj.x_foot = x_foot;
  traj.times = sol.times;
  for (const auto& s : sol.states) {
    const auto geo = leg_geometry(s[0], s[1], x_foot, p.l0);
    traj.x.push_back(s[0]);
    traj.y.push_back(s[1]);
    traj.x_dot.push_back(s[2]);
    traj.y_dot.push_back(s[3]);
    traj.k.push_back(stiffness_of(s, geo.c));
    traj.c.push_back(geo.c);
  }
  traj.c.back() = std::max(traj.c.back(), 0.0);
  traj.T_liftoff = traj.times.back();
  return traj;
}

}  // namespace detail

inline double slip_stiffness_cap(const SlipParams& p, const ControllerKind& kind) {
  if (const auto* c = std::get_if<ConservativeParamBased>(&kind)) return c->k_max_prime;
  return p.k_max;
}

/// Stance under instantaneous stiffness k = k_ref2D(c).
inline SlipTrajectory slip_instantaneous(const SlipParams& p, double k_cap,
                                         const IntegratorSettings& settings = stance_settings()) {
  const SlipState td = touchdown_state(p);
  const double xf = td.x_foot;
  auto rhs = [&](double, const State<4>& s) -> State<4> {
    const auto geo = leg_geometry(s[0], s[1], xf, p.l0);
    const double f = k_ref2D(geo.c, p, k_cap) * geo.c;
    return {s[2], s[3], f * geo.u_x / p.m, f * geo.u_y / p.m - p.g};
  };
  const auto sol = solve<4>(rhs, State<4>{td.x, td.y, td.x_dot, td.y_dot}, settings,
                            detail::slip_liftoff_event<4>(xf, p.l0));
  return detail::to_trajectory(sol, p, xf, [&](const State<4>&, double c) { return k_ref2D(c, p, k_cap); });
}

/// Stance with the first-order actuator driven by k_cmd = k_ref2D(c) on the
/// current state.
inline SlipTrajectory slip_with_actuator(const SlipParams& p, double k_cap,
                                         const IntegratorSettings& settings = stance_settings()) {
  const SlipState td = touchdown_state(p);
  const double xf = td.x_foot;
  auto rhs = [&](double, const State<5>& s) -> State<5> {
    const auto geo = leg_geometry(s[0], s[1], xf, p.l0);
    const double f = s[4] * geo.c;
    return {s[2], s[3], f * geo.u_x / p.m, f * geo.u_y / p.m - p.g,
            p.omega_s * (k_ref2D(geo.c, p, k_cap) - s[4])};
  };
  const auto sol = solve<5>(rhs, State<5>{td.x, td.y, td.x_dot, td.y_dot, k_cap}, settings,
                            detail::slip_liftoff_event<5>(xf, p.l0));
  return detail::to_trajectory(sol, p, xf, [](const State<5>& s, double) { return s[4]; });
}

/// CoM position at time t; past liftoff the mass follows its ballistic flight.
inline std::array<double, 2> com_position(const SlipTrajectory& traj, std::size_t grid_index, double t, double g) {
  if (grid_index < traj.grid_size()) return {traj.x[grid_index], traj.y[grid_index]};
  const std::size_t l = traj.times.size() - 1;
  const double tau = t - traj.T_liftoff;
  return {traj.x[l] + traj.x_dot[l] * tau, traj.y[l] + traj.y_dot[l] * tau - 0.5 * g * tau * tau};
}

/// max_t |r_pred - r_real| / max(c_pred) on the common grid.
inline double com_deviation(const SlipTrajectory& pred, const SlipTrajectory& real, double g, double dt) {
  const std::size_t n = std::max(pred.grid_size(), real.grid_size());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto a = com_position(pred, i, t, g);
    const auto b = com_position(real, i, t, g);
    worst = std::max(worst, std::hypot(a[0] - b[0], a[1] - b[1]));
  }
  const double peak = pred.max_c();
  return peak > 0.0 ? worst / peak : 0.0;
}

/// Peak |F_h| / F_v over samples whose vertical force exceeds 10 % of body weight.
inline double friction_ratio(const SlipTrajectory& traj, const SlipParams& p) {
  double eta = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto geo = leg_geometry(traj.x[i], traj.y[i], traj.x_foot, p.l0);
    const double f = traj.k[i] * traj.c[i];
    const double fh = f * geo.u_x;
    const double fv = f * geo.u_y;
    if (fv > 0.1 * p.m * p.g) eta = std::max(eta, std::abs(fh) / fv);
  }
  return eta;
}

inline SlipRollout slip_rollout(const SlipParams& params, const ControllerKind& kind,
                                const IntegratorSettings& settings = stance_settings()) {
  validate(params);
  const double cap = slip_stiffness_cap(params, kind);
  if (!(cap >= params.k_min && cap <= params.k_max)) {
    throw ValidationError("k_max_prime must lie in [k_min, k_max]");
  }
  SlipRollout r;
  r.realized = slip_with_actuator(params, cap, settings);
  r.predicted = std::holds_alternative<StiffnessAsState>(kind) ? r.realized
                                                               : slip_instantaneous(params, cap, settings);
  r.observables.D_2D = com_deviation(r.predicted, r.realized, params.g, settings.sample_dt);
  r.observables.dT_2D =
      std::abs(r.predicted.T_liftoff - r.realized.T_liftoff) / r.predicted.T_liftoff;
  r.observables.eta = friction_ratio(r.realized, params);
  for (std::size_t i = 0; i < r.realized.times.size(); ++i) {
    if (r.realized.y[i] <= 0.0) r.observables.negative_vertical_force = true;
  }
  return r;
}

inline double mechanical_energy(const SlipParams& p, double y, double x_dot, double y_dot) {
  return 0.5 * p.m * (x_dot * x_dot + y_dot * y_dot) + p.m * p.g * y;
}

struct SlipSweepRow {
  double angle_deg = 0.0;
  double alpha = 0.0;
  std::string series;  // "sweep" or "spot"
  std::optional<Observables2D> observables;
  std::string error;
};

struct SlipSweepConfig {
  SlipParams base;
  std::vector<double> alpha_grid;
  std::vector<double> angles_deg{15.0, 20.0};
  std::vector<double> spot_angles_deg{30.0};
  std::vector<double> spot_alphas{0.5, 1.0};
  unsigned threads = 0;
};

/// Parameter-based rollouts: full grid per sweep angle (angle-major), then the
/// spot checks.
inline std::vector<SlipSweepRow> slip_sweep(const SlipSweepConfig& cfg) {
  validate(cfg.base);
  std::vector<SlipSweepRow> rows;
  for (double a : cfg.angles_deg) {
    for (double alpha : cfg.alpha_grid) rows.push_back({a, alpha, "sweep", std::nullopt, {}});
  }
  for (double a : cfg.spot_angles_deg) {
    for (double alpha : cfg.spot_alphas) rows.push_back({a, alpha, "spot", std::nullopt, {}});
  }
  for (const auto& row : rows) validate(cfg.base.with_angle_deg(row.angle_deg).with_alpha(row.alpha));
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        auto& row = rows[i];
        try {
          const SlipParams p = cfg.base.with_angle_deg(row.angle_deg).with_alpha(row.alpha);
          row.observables = slip_rollout(p, ParamBased{}).observables;
        } catch (const Error& e) {
          row.error = e.what();
        }
      },
      cfg.threads);
  return rows;
}

}  // namespace vimpc
