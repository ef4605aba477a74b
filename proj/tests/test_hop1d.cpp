#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vimpc/hop1d.hpp"

using namespace vimpc;

namespace {

TaskParams1D nominal() { return TaskParams1D{}; }

const DerivedConstants1D kNominal = derive_constants(TaskParams1D{});

StanceTrajectory make_traj(std::vector<double> z) {
  StanceTrajectory t;
  for (std::size_t i = 0; i < z.size(); ++i) t.times.push_back(static_cast<double>(i) * 1e-4);
  t.z = std::move(z);
  t.T_liftoff = t.times.back();
  return t;
}

}  // namespace

TEST(KRef, HandValues) {
  EXPECT_EQ(k_ref(0.01, kNominal, 500.0), 500.0);
  EXPECT_NEAR(k_ref(0.1, kNominal, 500.0), 231.433, 1e-3);
  EXPECT_NEAR(k_ref(kNominal.z_crit, kNominal, 500.0), 500.0, 1e-9);
  EXPECT_EQ(k_ref(0.0, kNominal, 500.0), 500.0);
  EXPECT_EQ(k_ref(0.0, kNominal, 120.0), 120.0);
  EXPECT_EQ(k_ref(0.1, kNominal, 120.0), 120.0);
}

TEST(KRef, RateMatchesFiniteDifference) {
  const double z = 0.08;
  const double zdot = 0.7;
  const double h = 1e-7;
  const double fd = (k_ref(z + h * zdot, kNominal, 500.0) - k_ref(z - h * zdot, kNominal, 500.0)) / (2.0 * h);
  EXPECT_NEAR(k_ref_rate(z, zdot, kNominal, 500.0), fd, 1e-4 * std::abs(fd));
  EXPECT_EQ(k_ref_rate(0.01, zdot, kNominal, 500.0), 0.0);
  EXPECT_EQ(k_ref_rate(0.0, zdot, kNominal, 500.0), 0.0);
}

TEST(CommandPolicy, ParamBasedSaturatedIsKmax) {
  const TaskParams1D p = nominal().with_alpha(12.5);
  EXPECT_EQ(command_policy(p, ParamBased{}, {0.01, 2.0, 300.0}, kNominal), 500.0);
  EXPECT_NEAR(command_policy(p, ParamBased{}, {0.1, 0.0, 300.0}, kNominal), 231.433, 1e-3);
  EXPECT_EQ(command_policy(p, ConservativeParamBased{150.0}, {0.01, 2.0, 300.0}, kNominal), 150.0);
}

TEST(CommandPolicy, EntryCorrectionLowAlphaClipsToKmin) {
  const TaskParams1D p = nominal().with_alpha(12.5);
  const double z = kNominal.z_crit * (1.0 + 1e-9);
  // Rate at entry: F v / z_crit^2 = k_max^2 v / F.
  const double correction = 500.0 * 500.0 * 2.0 / kNominal.F_const / p.omega_s;
  EXPECT_NEAR(precompensated_command(p, z, 2.0, kNominal, 500.0), 500.0 - correction, 1e-4);
  EXPECT_NEAR(correction, 518.508, 1e-3);
  // The brisk-hopping form of the same correction, alpha_crit (k_max - k_min) / alpha.
  const double simplified = 25.0 * 450.0 / 12.5;
  EXPECT_NEAR(simplified, 900.0, 1e-12);
  EXPECT_LT(500.0 - simplified, 50.0);
  EXPECT_EQ(command_policy(p, StiffnessAsState{}, {z, 2.0, 500.0}, kNominal), 50.0);
}

TEST(CommandPolicy, EntryCorrectionHighAlphaInterior) {
  const TaskParams1D p = nominal().with_alpha(250.0);
  const double z = kNominal.z_crit * (1.0 + 1e-9);
  const double cmd = command_policy(p, StiffnessAsState{}, {z, 2.0, 500.0}, kNominal);
  EXPECT_GT(cmd, 50.0);
  EXPECT_LT(cmd, 500.0);
  EXPECT_NEAR(500.0 - cmd, 500.0 * 500.0 * 2.0 / kNominal.F_const / p.omega_s, 1e-4);
  EXPECT_NEAR(25.0 * 450.0 / 250.0, 45.0, 1e-12);
}

TEST(Predict, NominalParamBased) {
  const auto pred = predict(nominal().with_alpha(12.5), ParamBased{});
  EXPECT_GE(pred.T_liftoff, 0.25);
  EXPECT_LE(pred.T_liftoff, 0.35);
  EXPECT_GT(pred.max_z(), kNominal.z_crit);
  EXPECT_EQ(pred.times.back(), pred.T_liftoff);
  EXPECT_EQ(pred.z.back(), 0.0);
}

TEST(Predict, LinearSpringHalfPeriodWithoutGravity) {
  DerivedConstants1D c = kNominal;
  c.F_const = 1e6;  // keeps k_ref pinned at the cap
  const auto traj = integrate_instantaneous(1.0, 0.0, 2.0, c, 500.0);
  EXPECT_NEAR(traj.T_liftoff, std::numbers::pi * std::sqrt(1.0 / 500.0), 1e-4);
  EXPECT_NEAR(traj.T_liftoff, 0.140496, 1e-6);
  EXPECT_NEAR(traj.max_z(), 2.0 / std::sqrt(500.0), 1e-6);
}

TEST(Predict, ConservativeUsesCap) {
  const auto pred = predict(nominal().with_alpha(12.5), ConservativeParamBased{200.0});
  for (double k : pred.k) EXPECT_LE(k, 200.0);
  EXPECT_EQ(pred.k.front(), 200.0);
}

TEST(Predict, InvalidCapThrows) {
  EXPECT_THROW(predict(nominal(), ConservativeParamBased{700.0}), ValidationError);
}

TEST(Rollout, StiffnessAsStateHasNoMismatch) {
  for (double alpha : {0.1, 1.0, 12.5, 25.0, 100.0, 316.0}) {
    const auto r = rollout(nominal().with_alpha(alpha), StiffnessAsState{});
    EXPECT_LE(r.D_alpha, 1e-6) << alpha;
    EXPECT_LE(r.dT_alpha, 1e-6) << alpha;
  }
}

TEST(Rollout, ParamBasedExtremes) {
  const auto hi = rollout(nominal().with_alpha(316.0), ParamBased{});
  EXPECT_LE(hi.D_alpha, 0.05);
  EXPECT_LE(hi.dT_alpha, 0.02);
  const auto lo = rollout(nominal().with_alpha(0.3), ParamBased{});
  EXPECT_GE(lo.dT_alpha, 0.5);
  EXPECT_GE(rollout(nominal().with_alpha(0.1), ParamBased{}).D_alpha, 0.8);
}

TEST(Rollout, TrajectoryInvariants) {
  for (const ControllerKind& kind : {ControllerKind{ParamBased{}}, ControllerKind{StiffnessAsState{}},
                                     ControllerKind{ConservativeParamBased{300.0}}}) {
    for (double alpha : {0.1, 3.0, 30.0, 316.0}) {
      const auto r = rollout(nominal().with_alpha(alpha), kind);
      const auto& t = r.realized;
      ASSERT_EQ(t.z.size(), t.times.size());
      EXPECT_EQ(t.k.front(), stiffness_cap(nominal(), kind));
      // Dense output across the kink of k_ref at z_crit is only C0-accurate.
      const double tol = 1e-7 * 500.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_GE(t.z[i], 0.0);
        EXPECT_GE(t.k[i], 50.0 - tol);
        EXPECT_LE(t.k[i], 500.0 + tol);
        EXPECT_DOUBLE_EQ(t.F[i], t.k[i] * t.z[i]);
      }
    }
  }
}

TEST(Rollout, EnergyBound) {
  const TaskParams1D p = nominal();
  const double ke_td = 0.5 * p.m * p.v_td * p.v_td;
  for (double alpha : {0.1, 1.0, 10.0, 100.0, 316.0}) {
    const auto r = rollout(p.with_alpha(alpha), ParamBased{});
    const double ke_lo = 0.5 * p.m * r.realized.z_dot.back() * r.realized.z_dot.back();
    EXPECT_LE(ke_lo, ke_td + p.m * p.g * r.realized.max_z() + 0.05 * ke_td) << alpha;
  }
}

TEST(Rollout, PredictedImpulse) {
  const TaskParams1D p = nominal().with_alpha(12.5);
  const auto pred = predict(p, ParamBased{});
  const double impulse = trapezoid(pred.times, pred.F);
  const double expected = p.m * (pred.z_dot.front() - pred.z_dot.back()) + p.m * p.g * pred.T_liftoff;
  EXPECT_NEAR(impulse, expected, 1e-3 * expected);
}

TEST(Rollout, CostAgainstIdeal) {
  const TaskParams1D p = nominal();
  EXPECT_NEAR(ideal_cost(p), kNominal.F_const * kNominal.F_const * 0.3, 1e-12);
  const auto r = rollout(p.with_alpha(316.0), StiffnessAsState{});
  EXPECT_GT(r.J_realized, ideal_cost(p));
}

TEST(Metrics, ZeroExtendedDeviation) {
  const auto a = make_traj({0.0, 1.0, 2.0, 1.0, 0.0});
  const auto b = make_traj({0.0, 1.0, 1.5, 1.5, 1.0, 0.5, 0.0});
  // Grid sizes 4 and 6; a is zero past index 3, b's sample 4 is 1.0 and sample 5 is 0.5.
  EXPECT_DOUBLE_EQ(normalized_deviation(a, b), 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(normalized_deviation(a, a), 0.0);
}

TEST(Metrics, TrapezoidExactOnLinear) {
  EXPECT_DOUBLE_EQ(trapezoid({0.0, 0.5, 2.0}, {1.0, 2.0, 5.0}), 6.0);
}
