#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ifbs/types.hpp"

namespace ifbs {

/// Piecewise-constant step sizes: lambda_k = value of the last piece whose
/// start index is <= k. The first piece starts at k = 1.
class StepRule {
 public:
  static StepRule constant(double lambda);
  static StepRule piecewise(std::vector<std::pair<std::int64_t, double>> pieces);

  double at(std::int64_t k) const;
  bool is_constant() const { return pieces_.size() == 1; }
  const std::vector<std::pair<std::int64_t, double>>& pieces() const { return pieces_; }

 private:
  explicit StepRule(std::vector<std::pair<std::int64_t, double>> pieces)
      : pieces_(std::move(pieces)) {}

  std::vector<std::pair<std::int64_t, double>> pieces_;
};

enum class Variant { Constant, FistaBT, ChambolleDossal, Capped, AdaptiveRestart, AdOptSwitch };

const char* variant_name(Variant v);

/// Signal passed to Schedule::next_params. `signal` is the restart test
/// evaluated after the previous step; `x` is the current iterate x^k.
struct Feedback {
  bool signal = false;
  const Vector* x = nullptr;
};

struct MomentumParams {
  double alpha = 0.0;
  double lambda = 0.0;
  bool restarted = false;
  bool switched = false;
};

/// Outcome of a locally-optimal momentum estimate. `alpha` is empty when the
/// estimate is unavailable; `note` then says why.
struct MomentumEstimate {
  std::optional<double> alpha;
  std::string note;
};

using MomentumEstimator = std::function<MomentumEstimate(const Vector& x, double lambda)>;

/// Joint momentum / step-size policy for one run.
///
/// A Schedule is stateful: next_params must be called with k = 1, 2, ...
/// in order. Wrapping variants (Capped, AdaptiveRestart, AdOptSwitch) own a
/// copy of their inner schedule and use its step rule. Copying a Schedule
/// copies its state.
class Schedule {
 public:
  static Schedule constant(double alpha, StepRule step);
  static Schedule fista_bt(StepRule step);
  static Schedule chambolle_dossal(double a, StepRule step);
  static Schedule capped(Schedule inner, double cap);
  static Schedule adaptive_restart(Schedule inner);
  static Schedule adopt_switch(Schedule inner, MomentumEstimator estimator);

  Schedule(const Schedule& other);
  Schedule& operator=(const Schedule& other);
  Schedule(Schedule&&) noexcept = default;
  Schedule& operator=(Schedule&&) noexcept = default;
  ~Schedule() = default;

  MomentumParams next_params(std::int64_t k, const Feedback& feedback = {});

  // True when the variant reads Feedback::signal.
  bool consumes_feedback() const;

  // Fresh copy at k = 1 with the same configuration.
  Schedule fresh() const;

  Variant variant() const { return variant_; }
  const StepRule& step_rule() const { return step_; }
  const Schedule* inner() const { return inner_.get(); }
  double constant_alpha() const { return alpha_; }
  double cap() const { return cap_; }
  double cd_parameter() const { return a_; }

  bool has_switched() const { return switched_; }
  bool in_fallback() const { return fallback_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Human-readable description, e.g. "capped(fista-bt, cap=0.99)".
  std::string describe() const;

 private:
  Schedule(Variant v, StepRule step) : variant_(v), step_(std::move(step)) {}

  // Resets FISTA-like counters so the next emitted alpha is 0.
  void restart_momentum();
  double inner_alpha(std::int64_t k, const Feedback& feedback, bool& restarted);

  Variant variant_;
  StepRule step_;
  double alpha_ = 0.0;
  double a_ = 3.0;
  double cap_ = 1.0;
  std::unique_ptr<Schedule> inner_;
  MomentumEstimator estimator_;

  std::int64_t expected_k_ = 1;
  double t_ = 1.0;            // FistaBT: t_k
  std::int64_t local_k_ = 1;  // ChambolleDossal: index since last restart
  bool switched_ = false;
  bool fallback_ = false;
  double switched_alpha_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Locally optimal constant momentum (1 - sqrt(l lambda)) / (1 + sqrt(l lambda)).
/// Rejects l * lambda > 1 and negative inputs.
double optimal_momentum(double l_e, double lambda);

// <y_next - x_next, x_next - x_curr> > 0.
bool restart_signal(const Vector& y_next, const Vector& x_next, const Vector& x_curr);

enum class Guarantee {
  WeakConvergence,
  SummableSteps,
  FiniteIdentificationWithBounds,
  FiniteIdentificationExistence,
  InverseSquareObjectiveRate,
};

const char* guarantee_name(Guarantee g);

enum class Verdict { Analytic, HorizonOnly };

struct ValidityReport {
  bool convergence_ok = false;
  std::vector<std::string> reasons;
  std::vector<Guarantee> guarantees;
  Verdict verdict = Verdict::Analytic;

  // Momentum band observed over the horizon (analytic for Constant).
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double alpha_first = 0.0;
  double lambda_first = 0.0;

  bool sipm_ok = false;
  std::vector<std::string> sipm_reasons;

  bool has(Guarantee g) const;
};

/// Checks the schedule's parameters against the global convergence
/// hypotheses: lambda_k nondecreasing in (0, 1/L], alpha_k in [0, 1],
/// limsup alpha_k < 1. Also reports compatibility with the splitting
/// inertial method (alpha_k nondecreasing and below 1/3, lambda_k < 2/L).
/// Pure: simulates a fresh copy without feedback.
ValidityReport validate(const Schedule& s, std::int64_t horizon, double lipschitz);

}  // namespace ifbs
