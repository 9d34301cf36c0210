#include <cmath>

#include <gtest/gtest.h>

#include "ifbs/errors.hpp"
#include "ifbs/schedule.hpp"
#include "support/oracles.hpp"

namespace ifbs {
namespace {

std::vector<double> alphas(Schedule s, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(s.next_params(k).alpha);
  return out;
}

TEST(StepRule, PiecewiseLookup) {
  const auto r = StepRule::piecewise({{1, 0.1}, {5, 0.2}, {10, 0.3}});
  EXPECT_EQ(r.at(1), 0.1);
  EXPECT_EQ(r.at(4), 0.1);
  EXPECT_EQ(r.at(5), 0.2);
  EXPECT_EQ(r.at(1000), 0.3);
  EXPECT_TRUE(StepRule::constant(0.5).is_constant());
  EXPECT_THROW(StepRule::piecewise({{2, 0.1}}), InvalidArgument);
  EXPECT_THROW(StepRule::piecewise({}), InvalidArgument);
}

TEST(FistaBT, FirstTwoMomenta) {
  auto s = Schedule::fista_bt(StepRule::constant(1.0));
  EXPECT_EQ(s.next_params(1).alpha, 0.0);
  const auto t = testing::fista_t(3);
  const double expected = (t[2] - 1.0) / t[3];
  EXPECT_NEAR(s.next_params(2).alpha, expected, 1e-15);
  EXPECT_NEAR(expected, 0.28175352512532087, 1e-15);
}

TEST(FistaBT, MatchesDirectRecursion) {
  const auto t = testing::fista_t(2000);
  const auto a = alphas(Schedule::fista_bt(StepRule::constant(1.0)), 2000);
  for (int k = 1; k <= 2000; ++k) {
    EXPECT_NEAR(a[k - 1], (t[k] - 1.0) / t[k + 1], 1e-14);
  }
}

TEST(FistaBT, TGrowsAtLeastLinearly) {
  const auto t = testing::fista_t(10000);
  for (int k = 1; k <= 10000; ++k) EXPECT_GE(t[k + 1], (k + 1) / 2.0);
  const auto a = alphas(Schedule::fista_bt(StepRule::constant(1.0)), 10000);
  EXPECT_GT(a.back(), 0.999);
}

TEST(ChambolleDossal, FifthMomentum) {
  const auto a = alphas(Schedule::chambolle_dossal(3.0, StepRule::constant(1.0)), 5);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_NEAR(a[4], 3.0 / 7.0, 1e-15);
}

TEST(ChambolleDossal, ClosedForm) {
  const auto a = alphas(Schedule::chambolle_dossal(4.0, StepRule::constant(1.0)), 50);
  for (int k = 2; k <= 50; ++k) EXPECT_NEAR(a[k - 1], (k - 2.0) / (k + 3.0), 1e-14) << k;
}

TEST(ChambolleDossal, NonIntegerParameterStaysInRange) {
  const auto a = alphas(Schedule::chambolle_dossal(3.5482069184017964, StepRule::constant(1.0)), 200);
  EXPECT_EQ(a[1], 0.0);
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_GE(a[i], a[i - 1]);
    EXPECT_LT(a[i], 1.0);
  }
  EXPECT_TRUE(validate(Schedule::capped(Schedule::chambolle_dossal(3.5482069184017964, StepRule::constant(0.1)), 0.77),
                       1000, 10.0)
                  .convergence_ok);
}

TEST(Capped, NeverExceedsCap) {
  const auto a = alphas(Schedule::capped(Schedule::fista_bt(StepRule::constant(1.0)), 0.9), 500);
  for (double v : a) EXPECT_LE(v, 0.9);
  EXPECT_EQ(a.back(), 0.9);
}

TEST(AdaptiveRestart, SignalResetsMomentum) {
  auto s = Schedule::adaptive_restart(Schedule::fista_bt(StepRule::constant(1.0)));
  for (int k = 1; k <= 10; ++k) s.next_params(k);
  const auto p = s.next_params(11, {.signal = true});
  EXPECT_TRUE(p.restarted);
  EXPECT_EQ(p.alpha, 0.0);
  const auto t = testing::fista_t(3);
  EXPECT_NEAR(s.next_params(12).alpha, (t[2] - 1.0) / t[3], 1e-15);
}

TEST(AdOptSwitch, SwitchesExactlyOnce) {
  int calls = 0;
  auto s = Schedule::adopt_switch(Schedule::fista_bt(StepRule::constant(1.0)),
                                  [&](const Vector&, double) {
                                    ++calls;
                                    return MomentumEstimate{0.7, ""};
                                  });
  const Vector x = Vector::Zero(2);
  int switches = 0;
  for (int k = 1; k <= 100; ++k) {
    const auto p = s.next_params(k, {.signal = k % 7 == 0, .x = &x});
    switches += p.switched ? 1 : 0;
    if (k >= 7) {
      EXPECT_EQ(p.alpha, 0.7);
    }
  }
  EXPECT_EQ(switches, 1);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(s.has_switched());
}

TEST(AdOptSwitch, FallsBackToRestartWhenEstimateUnavailable) {
  auto s = Schedule::adopt_switch(Schedule::fista_bt(StepRule::constant(1.0)),
                                  [](const Vector&, double) { return MomentumEstimate{std::nullopt, "empty support"}; });
  const Vector x = Vector::Zero(1);
  for (int k = 1; k <= 5; ++k) s.next_params(k);
  const auto p = s.next_params(6, {.signal = true, .x = &x});
  EXPECT_FALSE(p.switched);
  EXPECT_TRUE(p.restarted);
  EXPECT_TRUE(s.in_fallback());
  ASSERT_EQ(s.warnings().size(), 1u);
  EXPECT_NE(s.warnings()[0].find("empty support"), std::string::npos);
}

TEST(Schedule, RejectsOutOfOrderIndex) {
  auto s = Schedule::constant(0.3, StepRule::constant(1.0));
  EXPECT_THROW(s.next_params(2), InvalidArgument);
  s.next_params(1);
  EXPECT_THROW(s.next_params(1), InvalidArgument);
}

TEST(Schedule, CopyCarriesState) {
  auto s = Schedule::fista_bt(StepRule::constant(1.0));
  for (int k = 1; k <= 5; ++k) s.next_params(k);
  Schedule copy = s;
  EXPECT_EQ(copy.next_params(6).alpha, s.next_params(6).alpha);
  EXPECT_EQ(s.fresh().next_params(1).alpha, 0.0);
}

TEST(Schedule, Describe) {
  EXPECT_EQ(Schedule::capped(Schedule::fista_bt(StepRule::constant(1.0)), 0.99).describe(),
            "capped(fista-bt, cap=0.99)");
  EXPECT_EQ(Schedule::adaptive_restart(Schedule::fista_bt(StepRule::constant(1.0))).describe(),
            "restart(fista-bt)");
}

TEST(OptimalMomentum, Examples) {
  EXPECT_EQ(optimal_momentum(1.0, 1.0), 0.0);
  EXPECT_NEAR(optimal_momentum(0.25, 1.0), 1.0 / 3.0, 1e-15);
  const double l = 7.0;
  EXPECT_NEAR(optimal_momentum(0.01 * l, 1.0 / l), 0.9 / 1.1, 1e-14);
  EXPECT_THROW(optimal_momentum(2.0, 1.0), InvalidArgument);
  EXPECT_THROW(optimal_momentum(-1.0, 1.0), InvalidArgument);
  EXPECT_EQ(optimal_momentum(0.0, 1.0), 1.0);
}

TEST(RestartSignal, Examples) {
  Vector x = Vector::Zero(2);
  Vector xn(2), y(2);
  xn << 1, 0;
  y << 2, 0;
  EXPECT_TRUE(restart_signal(y, xn, x));
  EXPECT_FALSE(restart_signal(y, x, x));
  Vector xc(2);
  xc << 2, 0;
  EXPECT_FALSE(restart_signal(y, xn, xc));
}

TEST(Validate, ConstantHalfIsAdmissible) {
  const double l = 3.0;
  const auto r = validate(Schedule::constant(0.5, StepRule::constant(1.0 / l)), 1000, l);
  EXPECT_TRUE(r.convergence_ok);
  EXPECT_TRUE(r.reasons.empty());
  EXPECT_EQ(r.verdict, Verdict::Analytic);
  EXPECT_TRUE(r.has(Guarantee::FiniteIdentificationWithBounds));
  EXPECT_TRUE(r.has(Guarantee::WeakConvergence));
  EXPECT_FALSE(r.sipm_ok);
}

TEST(Validate, ConstantOneFailsLimsup) {
  const auto r = validate(Schedule::constant(1.0, StepRule::constant(1.0)), 1000, 1.0);
  EXPECT_FALSE(r.convergence_ok);
  ASSERT_EQ(r.reasons.size(), 1u);
  EXPECT_NE(r.reasons[0].find("limsup alpha = 1"), std::string::npos);
}

TEST(Validate, FistaGetsIdentificationWithoutBounds) {
  const auto r = validate(Schedule::fista_bt(StepRule::constant(0.5)), 1000, 2.0);
  EXPECT_FALSE(r.convergence_ok);
  EXPECT_TRUE(r.has(Guarantee::FiniteIdentificationExistence));
  EXPECT_TRUE(r.has(Guarantee::InverseSquareObjectiveRate));
  EXPECT_FALSE(r.has(Guarantee::FiniteIdentificationWithBounds));
}

TEST(Validate, CappedFistaIsAdmissible) {
  const auto r = validate(Schedule::capped(Schedule::fista_bt(StepRule::constant(1.0)), 0.99), 1000, 1.0);
  EXPECT_TRUE(r.convergence_ok);
  EXPECT_TRUE(r.has(Guarantee::FiniteIdentificationExistence));
}

TEST(Validate, StepSizeViolations) {
  const auto dec = validate(Schedule::constant(0.2, StepRule::piecewise({{1, 0.5}, {10, 0.25}})), 100, 1.0);
  EXPECT_FALSE(dec.convergence_ok);
  const auto big = validate(Schedule::constant(0.2, StepRule::constant(1.5)), 100, 1.0);
  EXPECT_FALSE(big.convergence_ok);
  const auto inc = validate(Schedule::constant(0.2, StepRule::piecewise({{1, 0.5}, {10, 1.0}})), 100, 1.0);
  EXPECT_TRUE(inc.convergence_ok);
}

TEST(Validate, FeedbackVariantsAreHorizonOnly) {
  const auto r = validate(Schedule::adaptive_restart(Schedule::fista_bt(StepRule::constant(1.0))), 100, 1.0);
  EXPECT_EQ(r.verdict, Verdict::HorizonOnly);
  EXPECT_FALSE(r.convergence_ok);
}

TEST(Validate, SipmConditions) {
  EXPECT_TRUE(validate(Schedule::constant(0.2, StepRule::constant(1.5)), 100, 1.0).sipm_ok);
  EXPECT_FALSE(validate(Schedule::constant(0.4, StepRule::constant(1.0)), 100, 1.0).sipm_ok);
}

TEST(Validate, IsPure) {
  auto s = Schedule::fista_bt(StepRule::constant(1.0));
  s.next_params(1);
  s.next_params(2);
  s.next_params(3);
  Schedule twin = s;
  validate(s, 500, 1.0);
  validate(s, 500, 1.0);
  EXPECT_EQ(s.next_params(4).alpha, twin.next_params(4).alpha);
  const auto a = validate(s, 200, 1.0);
  const auto b = validate(s, 200, 1.0);
  EXPECT_EQ(a.reasons, b.reasons);
  EXPECT_EQ(a.alpha_upper, b.alpha_upper);
}

TEST(Validate, RejectsBadArguments) {
  const auto s = Schedule::constant(0.2, StepRule::constant(1.0));
  EXPECT_THROW(validate(s, 0, 1.0), InvalidArgument);
  EXPECT_THROW(validate(s, 10, 0.0), InvalidArgument);
}

}  // namespace
}  // namespace ifbs
