// Noise schedule: cumulative signal level, corruption timestep map, and the
// piecewise condition weight. Expected values are recomputed inline from the
// closed-form definitions rather than quoted as constants.

#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "mvkit/schedule.hpp"

using namespace mvkit;

TEST(Schedule, NoCorruptionAtTimestepZero) {
  const Schedule s;
  EXPECT_EQ(s.alpha_bar(0), 1.0);
}

TEST(Schedule, FirstStepUsesBetaStart) {
  const Schedule s;
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0 - 1e-4);
}

TEST(Schedule, CumulativeProductMatchesIndependentRecomputation) {
  const Schedule s;
  double acc = 1.0;
  for (int t = 1; t <= 1000; ++t) {
    const double beta = 1e-4 + (2e-2 - 1e-4) * (t - 1) / 999;
    acc *= 1.0 - beta;
    ASSERT_NEAR(s.alpha_bar(t), acc, 1e-14) << "t=" << t;
  }
  EXPECT_GT(s.alpha_bar(1000), 0.0);
}

TEST(Schedule, AlphaBarStrictlyDecreasing) {
  const Schedule s;
  for (int t = 1; t <= 1000; ++t)
    ASSERT_LT(s.alpha_bar(t), s.alpha_bar(t - 1)) << "t=" << t;
}

TEST(Schedule, CorruptionTimestepTable) {
  const Schedule s;
  EXPECT_EQ(s.f_of_t(0), 0);
  EXPECT_EQ(s.f_of_t(1), 0);    // round(0.2) = 0
  EXPECT_EQ(s.f_of_t(3), 1);    // round(0.6) = 1
  EXPECT_EQ(s.f_of_t(650), 130);
  EXPECT_EQ(s.f_of_t(1000), 200);
}

TEST(Schedule, CorruptionStaysStrictlyMilder) {
  const Schedule s;
  for (int t = 1; t <= 1000; ++t) {
    ASSERT_GE(s.f_of_t(t), 0);
    ASSERT_LT(s.f_of_t(t), t) << "t=" << t;
  }
}

TEST(Schedule, WeightAnchorsOnTheRamp) {
  const Schedule s;
  // Linear ramp from (1000, 1) down to (300, 0.8): w(650) sits halfway.
  EXPECT_NEAR(s.w_of_t(1000), 1.0, 1e-12);
  EXPECT_NEAR(s.w_of_t(300), 0.8, 1e-12);
  EXPECT_NEAR(s.w_of_t(650), 0.9, 1e-12);
}

TEST(Schedule, WeightBranchesAgreeAtTheDecayEnd) {
  const ScheduleParams p;
  const double ramp =
      1.0 - (1.0 - p.v_decay_end) * (p.t_peak - p.t_decay_end) /
                (p.t_peak - p.t_decay_end);
  const double decay = p.v_decay_end * std::exp(-p.decay_rate * 0.0);
  EXPECT_DOUBLE_EQ(ramp, decay);
  EXPECT_NEAR(Schedule().w_of_t(300), ramp, 1e-12);
}

TEST(Schedule, WeightMonotoneNonDecreasing) {
  const Schedule s;
  double prev = s.w_of_t(0);
  EXPECT_GE(prev, 0.0);
  for (int t = 1; t <= 1000; ++t) {
    const double w = s.w_of_t(t);
    ASSERT_GE(w, prev) << "t=" << t;
    ASSERT_LE(w, 1.0);
    prev = w;
  }
}

TEST(Schedule, ExponentialTailBelowDecayEnd) {
  const Schedule s;
  const ScheduleParams p;
  for (int t : {0, 50, 150, 299}) {
    const double expect =
        p.v_decay_end * std::exp(-p.decay_rate * (p.t_decay_end - t));
    EXPECT_NEAR(s.w_of_t(t), expect, 1e-12) << "t=" << t;
  }
}

TEST(Schedule, ZeroDecayRateGivesFlatTail) {
  ScheduleParams p;
  p.decay_rate = 0.0;
  const Schedule s(p);
  EXPECT_DOUBLE_EQ(s.w_of_t(0), p.v_decay_end);
  EXPECT_DOUBLE_EQ(s.w_of_t(150), p.v_decay_end);
}

TEST(Schedule, ZeroFloorReachesExactZeroWeight) {
  ScheduleParams p;
  p.v_decay_end = 0.0;
  const Schedule s(p);
  EXPECT_EQ(s.w_of_t(300), 0.0);
  EXPECT_EQ(s.w_of_t(0), 0.0);
  EXPECT_NEAR(s.w_of_t(1000), 1.0, 1e-12);
}

TEST(Schedule, SingleStepSchedule) {
  ScheduleParams p;
  p.t_max = 1;
  const Schedule s(p);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0 - p.beta_start);
}

TEST(Schedule, RejectsInvalidParams) {
  const auto code_of = [](ScheduleParams p) -> std::optional<ErrorCode> {
    try {
      Schedule s(p);
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  ScheduleParams p;
  p.corrupt_fraction = 1.0;  // would make t' = t
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.corrupt_fraction = 0.0;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.t_max = 0;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.beta_start = 0.0;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.beta_end = 1.0;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.t_decay_end = 1000.0;  // must stay below t_peak
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.v_decay_end = 1.5;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
  p = {};
  p.decay_rate = -0.1;
  EXPECT_EQ(code_of(p), ErrorCode::ConfigError);
}

TEST(Schedule, OutOfRangeTimestepsRejected) {
  const Schedule s;
  const auto code_of = [](auto&& fn) -> std::optional<ErrorCode> {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  EXPECT_EQ(code_of([&] { s.alpha_bar(-1); }), ErrorCode::TimestepOutOfRange);
  EXPECT_EQ(code_of([&] { s.alpha_bar(1001); }), ErrorCode::TimestepOutOfRange);
  EXPECT_EQ(code_of([&] { s.f_of_t(-1); }), ErrorCode::TimestepOutOfRange);
  EXPECT_EQ(code_of([&] { s.f_of_t(1001); }), ErrorCode::TimestepOutOfRange);
  EXPECT_EQ(code_of([&] { s.w_of_t(-1); }), ErrorCode::TimestepOutOfRange);
  EXPECT_EQ(code_of([&] { s.w_of_t(1001); }), ErrorCode::TimestepOutOfRange);
}
