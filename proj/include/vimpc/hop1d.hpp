#pragma once

// 1D monoped stance: reference stiffness schedule, command policies, the
// predicted and realized stance rollouts, and the deviation metrics.
//
// Stance dynamics in compression coordinates:  m z'' = m g - k z
// First-order actuator:                          k'  = omega_s (k_cmd - k)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "vimpc/core.hpp"
#include "vimpc/integrate.hpp"

namespace vimpc {

/// Time-sampled stance record. Samples lie on the uniform grid
/// t = i * sample_dt, followed by one final sample at liftoff.
struct StanceTrajectory {
  std::vector<double> times;
  std::vector<double> z;
  std::vector<double> z_dot;
  std::vector<double> k;
  std::vector<double> k_cmd;
  std::vector<double> F;
  double T_liftoff = 0.0;

  std::size_t size() const { return times.size(); }
  /// Number of samples on the uniform grid (all but the liftoff sample).
  std::size_t grid_size() const { return times.empty() ? 0 : times.size() - 1; }
  double max_z() const { return z.empty() ? 0.0 : *std::max_element(z.begin(), z.end()); }
};

struct RolloutResult {
  StanceTrajectory predicted;
  StanceTrajectory realized;
  double D_alpha = 0.0;
  double dT_alpha = 0.0;
  double J_realized = 0.0;  // [N^2 s]
};

struct StanceState {
  double z = 0.0;
  double z_dot = 0.0;
  double k = 0.0;
};

/// Integrator settings used for every stance rollout.
inline IntegratorSettings stance_settings() {
  IntegratorSettings s;
  s.rel_tol = 1e-9;
  s.abs_tol = 1e-12;
  s.max_step = 5e-4;
  s.event_refine_tol = 1e-10;
  s.sample_dt = 1e-4;
  s.t_max = 10.0;
  return s;
}

/// Arms the liftoff event once compression exceeds 1 um or 0.1 ms have passed;
/// stance starts on the event surface.
inline bool liftoff_armed(double t, double compression) { return compression > 1e-6 || t > 1e-4; }

/// Parameter-based reference min(k_cap, F_const / z). Returns k_cap at z <= 0.
inline double k_ref(double z, const DerivedConstants1D& consts, double k_cap) {
  if (z <= 0.0) return k_cap;
  return std::min(k_cap, consts.F_const / z);
}

/// Time derivative of k_ref along a trajectory: -F_const z_dot / z^2 inside the
/// force-regulated regime, zero where the reference is saturated.
inline double k_ref_rate(double z, double z_dot, const DerivedConstants1D& consts, double k_cap) {
  if (z <= 0.0 || consts.F_const / z >= k_cap) return 0.0;
  return -consts.F_const * z_dot / (z * z);
}

/// Stiffness cap of a controller: k_max, or k_max_prime for the conservative one.
inline double stiffness_cap(const TaskParams1D& params, const ControllerKind& kind) {
  if (const auto* c = std::get_if<ConservativeParamBased>(&kind)) return c->k_max_prime;
  return params.k_max;
}

/// Unclipped command that makes the lagged stiffness follow k_ref exactly:
/// k_ref + k_ref' / omega_s.
inline double precompensated_command(const TaskParams1D& params, double z, double z_dot,
                                     const DerivedConstants1D& consts, double k_cap) {
  return k_ref(z, consts, k_cap) + k_ref_rate(z, z_dot, consts, k_cap) / params.omega_s;
}

inline double command_policy(const TaskParams1D& params, const ControllerKind& kind, const StanceState& state,
                             const DerivedConstants1D& consts) {
  const double cap = stiffness_cap(params, kind);
  if (std::holds_alternative<StiffnessAsState>(kind)) {
    return std::clamp(precompensated_command(params, state.z, state.z_dot, consts, cap), params.k_min,
                      params.k_max);
  }
  return k_ref(state.z, consts, cap);
}

namespace detail {

inline TerminalEvent<2> liftoff_event2() {
  TerminalEvent<2> ev;
  ev.value = [](double, const State<2>& s) { return s[0]; };
  ev.armed = [](double t, const State<2>& s) { return liftoff_armed(t, s[0]); };
  ev.direction = EventDirection::Falling;
  return ev;
}

inline TerminalEvent<3> liftoff_event3() {
  TerminalEvent<3> ev;
  ev.value = [](double, const State<3>& s) { return s[0]; };
  ev.armed = [](double t, const State<3>& s) { return liftoff_armed(t, s[0]); };
  ev.direction = EventDirection::Falling;
  return ev;
}

inline void finish(StanceTrajectory& traj) {
  // The liftoff sample sits on z = 0 up to the event tolerance.
  traj.z.back() = std::max(traj.z.back(), 0.0);
  traj.F.back() = traj.k.back() * traj.z.back();
  traj.T_liftoff = traj.times.back();
}

}  // namespace detail

/// Stance under an instantaneous stiffness law k = k_ref(z) (no actuator lag).
/// Takes the constants directly, so degenerate tasks (e.g. g = 0) can be probed.
inline StanceTrajectory integrate_instantaneous(double m, double g, double v_td, const DerivedConstants1D& consts,
                                                double k_cap, const IntegratorSettings& settings = stance_settings()) {
  auto rhs = [&](double, const State<2>& s) -> State<2> {
    return {s[1], g - k_ref(s[0], consts, k_cap) * s[0] / m};
  };
  const auto sol = solve<2>(rhs, State<2>{0.0, v_td}, settings, detail::liftoff_event2());
  StanceTrajectory traj;
  traj.times = sol.times;
  for (const auto& s : sol.states) {
    const double k = k_ref(s[0], consts, k_cap);
    traj.z.push_back(s[0]);
    traj.z_dot.push_back(s[1]);
    traj.k.push_back(k);
    traj.k_cmd.push_back(k);
    traj.F.push_back(k * s[0]);
  }
  detail::finish(traj);
  return traj;
}

/// Stance coupled with the first-order actuator, the command being the
/// controller's policy evaluated on the current (realized) state.
inline StanceTrajectory integrate_with_actuator(const TaskParams1D& params, const ControllerKind& kind,
                                                const DerivedConstants1D& consts,
                                                const IntegratorSettings& settings = stance_settings()) {
  const double m = params.m;
  const double g = params.g;
  const double w = params.omega_s;
  auto rhs = [&](double, const State<3>& s) -> State<3> {
    const double cmd = command_policy(params, kind, StanceState{s[0], s[1], s[2]}, consts);
    return {s[1], g - s[2] * s[0] / m, w * (cmd - s[2])};
  };
  const double k0 = k_ref(0.0, consts, stiffness_cap(params, kind));
  const auto sol = solve<3>(rhs, State<3>{0.0, params.v_td, k0}, settings, detail::liftoff_event3());
  StanceTrajectory traj;
  traj.times = sol.times;
  for (const auto& s : sol.states) {
    traj.z.push_back(s[0]);
    traj.z_dot.push_back(s[1]);
    traj.k.push_back(s[2]);
    traj.k_cmd.push_back(command_policy(params, kind, StanceState{s[0], s[1], s[2]}, consts));
    traj.F.push_back(s[2] * s[0]);
  }
  detail::finish(traj);
  return traj;
}

/// The controller's own prediction of the stance.
///
/// Parameter-based variants predict with instantaneous stiffness; the
/// stiffness-as-state controller predicts with the augmented dynamics.
inline StanceTrajectory predict(const TaskParams1D& params, const ControllerKind& kind,
                                const IntegratorSettings& settings = stance_settings()) {
  validate(params);
  validate(kind, params);
  const auto consts = derive_constants(params);
  if (std::holds_alternative<StiffnessAsState>(kind)) {
    return integrate_with_actuator(params, kind, consts, settings);
  }
  return integrate_instantaneous(params.m, params.g, params.v_td, consts, stiffness_cap(params, kind), settings);
}

/// Stance on the physical system: commands pass through the actuator lag.
inline StanceTrajectory realize(const TaskParams1D& params, const ControllerKind& kind,
                                const IntegratorSettings& settings = stance_settings()) {
  validate(params);
  validate(kind, params);
  return integrate_with_actuator(params, kind, derive_constants(params), settings);
}

/// max_i |a_i - b_i| / max(a) over the common grid, each trajectory
/// zero-extended past its own liftoff.
inline double normalized_deviation(const StanceTrajectory& pred, const StanceTrajectory& real) {
  const std::size_t n = std::max(pred.grid_size(), real.grid_size());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < pred.grid_size() ? pred.z[i] : 0.0;
    const double b = i < real.grid_size() ? real.z[i] : 0.0;
    worst = std::max(worst, std::abs(a - b));
  }
  const double peak = pred.max_z();
  return peak > 0.0 ? worst / peak : 0.0;
}

/// Trapezoidal integral of `values` over `times`.
inline double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  }
  return acc;
}

inline double squared_force_integral(const StanceTrajectory& traj) {
  std::vector<double> f2(traj.F.size());
  std::transform(traj.F.begin(), traj.F.end(), f2.begin(), [](double f) { return f * f; });
  return trapezoid(traj.times, f2);
}

inline RolloutResult rollout(const TaskParams1D& params, const ControllerKind& kind,
                             const IntegratorSettings& settings = stance_settings()) {
  RolloutResult r;
  r.predicted = predict(params, kind, settings);
  r.realized = realize(params, kind, settings);
  r.D_alpha = normalized_deviation(r.predicted, r.realized);
  r.dT_alpha = std::abs(r.predicted.T_liftoff - r.realized.T_liftoff) / r.predicted.T_liftoff;
  r.J_realized = squared_force_integral(r.realized);
  return r;
}

/// Cost of the unconstrained constant-force optimum, F_const^2 T.
inline double ideal_cost(const TaskParams1D& params) {
  const double f = constant_force(params);
  return f * f * params.T;
}

}  // namespace vimpc
