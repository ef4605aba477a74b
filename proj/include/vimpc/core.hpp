#pragma once

// Task description for the 1D monoped and the closed-form quantities derived
// from it. SI units throughout: kg, m, s, N/m, rad/s.

#include <cmath>
#include <string>
#include <variant>

#include "vimpc/errors.hpp"

namespace vimpc {

/// Physical task description for one stance phase of the vertical monoped.
///
/// The actuator bandwidth is stored directly; the dimensionless bandwidth
/// alpha = omega_s * T is derived on demand so the two can never disagree.
/// `l0` is unused by the 1D stance model (it is written in compression
/// coordinates) and is kept so one record serves both the 1D and planar paths.
struct TaskParams1D {
  double m = 1.0;        // mass [kg]
  double g = 9.81;       // gravity [m/s^2]
  double l0 = 0.5;       // leg natural length [m]
  double v_td = 2.0;     // touchdown velocity [m/s]
  double T = 0.3;        // nominal stance duration [s]
  double k_min = 50.0;   // [N/m]
  double k_max = 500.0;  // [N/m]
  double omega_s = 25.0 / 0.3;  // actuator bandwidth [rad/s]

  double alpha() const { return omega_s * T; }

  /// Copy with the bandwidth set so that omega_s * T == alpha.
  TaskParams1D with_alpha(double alpha) const {
    TaskParams1D p = *this;
    p.omega_s = alpha / T;
    return p;
  }

  TaskParams1D with_v_td(double v) const {
    TaskParams1D p = *this;
    p.v_td = v;
    return p;
  }

  bool operator==(const TaskParams1D&) const = default;
};

/// Closed-form constants of the parameter-based reference.
struct DerivedConstants1D {
  double F_const = 0.0;     // constant-force minimizer [N]
  double z_crit = 0.0;      // regime-transition compression [m]
  double K_task = 0.0;      // task constant [-]
  double alpha_crit = 0.0;  // realizability threshold [-]

  bool operator==(const DerivedConstants1D&) const = default;
};

struct ParamBased {
  bool operator==(const ParamBased&) const = default;
};

struct StiffnessAsState {
  bool operator==(const StiffnessAsState&) const = default;
};

/// Parameter-based controller whose upper stiffness bound is lowered to
/// `k_max_prime`.
struct ConservativeParamBased {
  double k_max_prime = 0.0;
  bool operator==(const ConservativeParamBased&) const = default;
};

using ControllerKind = std::variant<ParamBased, StiffnessAsState, ConservativeParamBased>;

inline std::string controller_name(const ControllerKind& kind) {
  struct {
    std::string operator()(const ParamBased&) const { return "param"; }
    std::string operator()(const StiffnessAsState&) const { return "state"; }
    std::string operator()(const ConservativeParamBased&) const { return "conservative"; }
  } visitor;
  return std::visit(visitor, kind);
}

namespace detail {

inline void require_positive(double value, const char* name) {
  // NaN fails this comparison too.
  if (!(value > 0.0)) {
    throw NonPositive(std::string(name) + " must be > 0 (got " + std::to_string(value) + ")");
  }
}

}  // namespace detail

/// Returns `params` unchanged iff every invariant holds; throws otherwise.
inline const TaskParams1D& validate(const TaskParams1D& params) {
  detail::require_positive(params.m, "m");
  detail::require_positive(params.g, "g");
  detail::require_positive(params.T, "T");
  detail::require_positive(params.v_td, "v_td");
  detail::require_positive(params.omega_s, "omega_s");
  detail::require_positive(params.k_min, "k_min");
  if (!(params.k_min < params.k_max)) {
    throw DegenerateRange("k_min must be < k_max (got [" + std::to_string(params.k_min) + ", " +
                          std::to_string(params.k_max) + "])");
  }
  return params;
}

/// Validates the stiffness cap of a conservative controller against the range.
inline void validate(const ControllerKind& kind, const TaskParams1D& params) {
  if (const auto* c = std::get_if<ConservativeParamBased>(&kind)) {
    if (!(c->k_max_prime >= params.k_min && c->k_max_prime <= params.k_max)) {
      throw ValidationError("k_max_prime must lie in [k_min, k_max] (got " +
                            std::to_string(c->k_max_prime) + ")");
    }
  }
}

inline double constant_force(const TaskParams1D& p) {
  return p.m * (2.0 * p.v_td / p.T + p.g);
}

inline double critical_alpha(const TaskParams1D& p) {
  return p.k_max * p.k_max * p.T * p.T / (2.0 * p.m * (p.k_max - p.k_min));
}

inline DerivedConstants1D derive_constants(const TaskParams1D& params) {
  validate(params);
  DerivedConstants1D c;
  c.F_const = constant_force(params);
  c.z_crit = c.F_const / params.k_max;
  c.K_task = critical_alpha(params);
  c.alpha_crit = c.K_task;
  return c;
}

}  // namespace vimpc
