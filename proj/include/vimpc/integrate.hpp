#pragma once

// Adaptive Dormand-Prince 5(4) integrator with 4th-order dense output and a
// single guarded terminal event.
//
// The stepper keeps the classic FSAL layout (k7 of an accepted step is k1 of
// the next). Samples are emitted on a uniform grid t = i * sample_dt through
// the continuous extension, plus one final sample at the stopping time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vimpc/errors.hpp"

namespace vimpc {

struct IntegratorSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 5e-4;           // [s]
  double event_refine_tol = 1e-10;  // [s]
  double t_max = 10.0;              // hard horizon [s]
  double sample_dt = 1e-4;          // dense-output grid spacing [s]
};

inline void validate(const IntegratorSettings& s) {
  if (!(s.rel_tol > 0.0) || !(s.abs_tol >= 0.0) || !(s.max_step > 0.0) ||
      !(s.event_refine_tol > 0.0) || !(s.t_max > 0.0) || !(s.sample_dt > 0.0)) {
    throw ValidationError("integrator settings: tolerances, steps and horizon must be positive");
  }
}

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct SampledSolution {
  std::vector<double> times;
  std::vector<State<N>> states;
  std::optional<double> terminal_time;
  bool terminated_by_event = false;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

enum class EventDirection { Falling, Rising, Any };

/// Terminal event: integration stops where `value` changes sign in
/// `direction`, but only on steps that start after `armed` first returned true.
template <std::size_t N>
struct TerminalEvent {
  std::function<double(double, const State<N>&)> value;
  std::function<bool(double, const State<N>&)> armed = [](double, const State<N>&) { return true; };
  EventDirection direction = EventDirection::Falling;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  // Continuous extension (Hairer, Norsett & Wanner, DOPRI5 contd5).
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<N>, 5> r{};

  State<N> at(double t) const {
    const double theta = (t - t0) / h;
    const double theta1 = 1.0 - theta;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
    }
    return y;
  }
};

inline bool crossed(double before, double after, EventDirection dir) {
  switch (dir) {
    case EventDirection::Falling: return before > 0.0 && after <= 0.0;
    case EventDirection::Rising: return before < 0.0 && after >= 0.0;
    case EventDirection::Any:
      return (before > 0.0 && after <= 0.0) || (before < 0.0 && after >= 0.0);
  }
  return false;
}

template <std::size_t N>
double error_norm(const State<N>& err, const State<N>& y0, const State<N>& y1, double atol, double rtol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

template <std::size_t N>
double rms(const State<N>& v, const State<N>& scale_from, double atol, double rtol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double q = v[i] / (atol + rtol * std::abs(scale_from[i]));
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t = 0.
///
/// Without an event the solve runs to `settings.t_max` and returns normally.
/// With an event, reaching t_max throws HorizonExceeded.
template <std::size_t N, typename Rhs>
SampledSolution<N> solve(Rhs&& rhs, const State<N>& y0, const IntegratorSettings& settings,
                         const std::optional<TerminalEvent<N>>& event = std::nullopt) {
  using detail::Dopri5;
  validate(settings);

  const double rtol = settings.rel_tol;
  const double atol = settings.abs_tol;
  const double t_end = settings.t_max;
  const double dt = settings.sample_dt;
  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 5.0;
  const double eps = std::numeric_limits<double>::epsilon();

  SampledSolution<N> out;
  out.times.push_back(0.0);
  out.states.push_back(y0);
  std::size_t next_sample = 1;

  double t = 0.0;
  State<N> y = y0;
  State<N> k1 = rhs(t, y);

  bool armed = event && event->armed(t, y);
  double e_prev = event ? event->value(t, y) : 0.0;

  // Initial step from the scaled derivative magnitude (Hairer's hinit, first
  // stage only); the controller corrects it within a few steps.
  double h;
  {
    const double d0 = detail::rms<N>(y, y, atol, rtol);
    const double d1 = detail::rms<N>(k1, y, atol, rtol);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, settings.max_step);
  }

  auto emit_samples_until = [&](const detail::DenseStep<N>& dense, double t_stop, const State<N>& y_stop,
                                bool inclusive) {
    for (;;) {
      const double ts = static_cast<double>(next_sample) * dt;
      if (inclusive ? ts > t_stop : ts >= t_stop) break;
      out.times.push_back(ts);
      out.states.push_back(ts == t_stop ? y_stop : dense.at(ts));
      ++next_sample;
    }
  };

  std::array<State<N>, 7> k;
  State<N> ytmp;
  while (true) {
    if (t >= t_end) {
      if (event) {
        throw HorizonExceeded("no terminal event before t_max = " + std::to_string(t_end) + " s");
      }
      break;
    }
    h = std::min({h, settings.max_step, t_end - t});
    if (h < 16.0 * eps * std::max(1.0, std::abs(t))) {
      throw StepUnderflow("step size underflow at t = " + std::to_string(t));
    }

    k[0] = k1;
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * Dopri5::a21 * k[0][i];
    k[1] = rhs(t + Dopri5::c2 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (Dopri5::a31 * k[0][i] + Dopri5::a32 * k[1][i]);
    k[2] = rhs(t + Dopri5::c3 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (Dopri5::a41 * k[0][i] + Dopri5::a42 * k[1][i] + Dopri5::a43 * k[2][i]);
    k[3] = rhs(t + Dopri5::c4 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (Dopri5::a51 * k[0][i] + Dopri5::a52 * k[1][i] + Dopri5::a53 * k[2][i] +
                            Dopri5::a54 * k[3][i]);
    k[4] = rhs(t + Dopri5::c5 * h, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (Dopri5::a61 * k[0][i] + Dopri5::a62 * k[1][i] + Dopri5::a63 * k[2][i] +
                            Dopri5::a64 * k[3][i] + Dopri5::a65 * k[4][i]);
    k[5] = rhs(t + h, ytmp);
    State<N> y_new;
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (Dopri5::a71 * k[0][i] + Dopri5::a73 * k[2][i] + Dopri5::a74 * k[3][i] +
                             Dopri5::a75 * k[4][i] + Dopri5::a76 * k[5][i]);
    const double t_new = t + h;
    k[6] = rhs(t_new, y_new);

    State<N> err;
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (Dopri5::e1 * k[0][i] + Dopri5::e3 * k[2][i] + Dopri5::e4 * k[3][i] +
                    Dopri5::e5 * k[4][i] + Dopri5::e6 * k[5][i] + Dopri5::e7 * k[6][i]);
    const double err_norm = detail::error_norm<N>(err, y, y_new, atol, rtol);
    if (!std::isfinite(err_norm)) {
      ++out.rejected_steps;
      h *= kMinFactor;
      continue;
    }
    if (err_norm > 1.0) {
      ++out.rejected_steps;
      h *= std::max(kMinFactor, kSafety * std::pow(err_norm, -0.2));
      continue;
    }
    ++out.accepted_steps;

    detail::DenseStep<N> dense;
    dense.t0 = t;
    dense.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y_new[i] - y[i];
      const double bspl = h * k[0][i] - ydiff;
      dense.r[0][i] = y[i];
      dense.r[1][i] = ydiff;
      dense.r[2][i] = bspl;
      dense.r[3][i] = ydiff - h * k[6][i] - bspl;
      dense.r[4][i] = h * (Dopri5::d1 * k[0][i] + Dopri5::d3 * k[2][i] + Dopri5::d4 * k[3][i] +
                           Dopri5::d5 * k[4][i] + Dopri5::d6 * k[5][i] + Dopri5::d7 * k[6][i]);
    }

    if (event) {
      const double e_new = event->value(t_new, y_new);
      if (armed && detail::crossed(e_prev, e_new, event->direction)) {
        // Bisect the continuous extension; `hi` always sits past the crossing.
        double lo = t;
        double hi = t_new;
        State<N> y_hi = y_new;
        while (hi - lo > settings.event_refine_tol) {
          const double mid = 0.5 * (lo + hi);
          const State<N> y_mid = dense.at(mid);
          if (detail::crossed(e_prev, event->value(mid, y_mid), event->direction)) {
            hi = mid;
            y_hi = y_mid;
          } else {
            lo = mid;
          }
        }
        emit_samples_until(dense, hi, y_hi, false);
        out.times.push_back(hi);
        out.states.push_back(y_hi);
        out.terminal_time = hi;
        out.terminated_by_event = true;
        return out;
      }
      e_prev = e_new;
      if (!armed) armed = event->armed(t_new, y_new);
    }

    emit_samples_until(dense, t_new, y_new, true);

    t = t_new;
    y = y_new;
    k1 = k[6];
    const double factor = err_norm == 0.0 ? kMaxFactor
                                          : std::clamp(kSafety * std::pow(err_norm, -0.2), kMinFactor, kMaxFactor);
    h *= factor;
  }

  if (out.times.back() != t) {
    out.times.push_back(t);
    out.states.push_back(y);
  }
  return out;
}

}  // namespace vimpc
