#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mvkit/errors.hpp"

namespace mvkit {

// Linear-in-beta noise schedule plus the time-dependent controls used when
// building visual conditions: the corruption timestep map f(t) and the
// condition weight w(t).
struct ScheduleParams {
  int t_max = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;

  // t' = round(corrupt_fraction * t); must stay strictly below t for t >= 1,
  // so validation requires the fraction to sit in (0, 1).
  double corrupt_fraction = 0.2;

  // Weight curve: linear ramp from 1 at t_peak down to v_decay_end at
  // t_decay_end, then exponential decay with rate decay_rate below that.
  double t_peak = 1000.0;
  double t_decay_end = 300.0;
  double v_decay_end = 0.8;
  double decay_rate = 0.075;
};

class Schedule {
 public:
  explicit Schedule(const ScheduleParams& params = {}) : p_(params) {
    validate(p_);
    alpha_bar_.resize(static_cast<std::size_t>(p_.t_max) + 1);
    alpha_bar_[0] = 1.0;  // t = 0 means "no corruption applied"
    double acc = 1.0;
    for (int s = 1; s <= p_.t_max; ++s) {
      const double beta =
          p_.t_max == 1
              ? p_.beta_start
              : p_.beta_start +
                    (p_.beta_end - p_.beta_start) * (s - 1) / (p_.t_max - 1);
      acc *= 1.0 - beta;
      alpha_bar_[static_cast<std::size_t>(s)] = acc;
    }
  }

  static void validate(const ScheduleParams& p) {
    require(p.t_max >= 1, ErrorCode::ConfigError, "t_max must be >= 1");
    require(p.beta_start > 0 && p.beta_start < 1, ErrorCode::ConfigError,
            "beta_start must lie in (0,1)");
    require(p.beta_end > 0 && p.beta_end < 1, ErrorCode::ConfigError,
            "beta_end must lie in (0,1)");
    // corrupt_fraction = 1 would give t' = t, violating t' < t for t >= 1.
    require(p.corrupt_fraction > 0 && p.corrupt_fraction < 1,
            ErrorCode::ConfigError, "corrupt_fraction must lie in (0,1)");
    require(p.t_peak > p.t_decay_end && p.t_decay_end > 0,
            ErrorCode::ConfigError, "need t_peak > t_decay_end > 0");
    require(p.v_decay_end >= 0 && p.v_decay_end <= 1, ErrorCode::ConfigError,
            "v_decay_end must lie in [0,1]");
    require(p.decay_rate >= 0, ErrorCode::ConfigError,
            "decay_rate must be non-negative");
  }

  const ScheduleParams& params() const noexcept { return p_; }
  int t_max() const noexcept { return p_.t_max; }

  // Cumulative product of (1 - beta_s) for s = 1..t; alpha_bar(0) = 1.
  double alpha_bar(int t) const {
    require(t >= 0 && t <= p_.t_max, ErrorCode::TimestepOutOfRange,
            "alpha_bar index " + std::to_string(t) + " outside [0, " +
                std::to_string(p_.t_max) + "]");
    return alpha_bar_[static_cast<std::size_t>(t)];
  }

  // Corruption timestep for target timestep t.
  int f_of_t(int t) const {
    require(t >= 0 && t <= p_.t_max, ErrorCode::TimestepOutOfRange,
            "timestep " + std::to_string(t) + " outside [0, " +
                std::to_string(p_.t_max) + "]");
    return static_cast<int>(std::lround(p_.corrupt_fraction * t));
  }

  // Condition weight, clamped to [0,1]. Defined for t in [0, t_peak].
  double w_of_t(int t) const {
    require(t >= 0 && t <= static_cast<int>(p_.t_peak),
            ErrorCode::TimestepOutOfRange,
            "timestep " + std::to_string(t) + " outside [0, t_peak]");
    double w;
    if (t >= p_.t_decay_end) {
      w = 1.0 - (1.0 - p_.v_decay_end) * (p_.t_peak - t) /
                    (p_.t_peak - p_.t_decay_end);
    } else {
      w = p_.v_decay_end * std::exp(-p_.decay_rate * (p_.t_decay_end - t));
    }
    return std::clamp(w, 0.0, 1.0);
  }

 private:
  ScheduleParams p_;
  std::vector<double> alpha_bar_;
};

}  // namespace mvkit
