#include "ifbs/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ifbs/errors.hpp"

namespace ifbs {

// ---------------------------------------------------------------------------
// StepRule

StepRule StepRule::constant(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("StepRule: step size must be positive and finite");
  }
  return StepRule({{1, lambda}});
}

StepRule StepRule::piecewise(std::vector<std::pair<std::int64_t, double>> pieces) {
  if (pieces.empty() || pieces.front().first != 1) {
    throw InvalidArgument("StepRule: the first piece must start at k = 1");
  }
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].first <= pieces[i - 1].first) {
      throw InvalidArgument("StepRule: piece start indices must be strictly increasing");
    }
  }
  for (const auto& piece : pieces) {
    if (!std::isfinite(piece.second)) throw InvalidArgument("StepRule: non-finite step size");
  }
  return StepRule(std::move(pieces));
}

double StepRule::at(std::int64_t k) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), k,
                             [](std::int64_t key, const auto& piece) { return key < piece.first; });
  return std::prev(it)->second;
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Constant: return "constant";
    case Variant::FistaBT: return "fista-bt";
    case Variant::ChambolleDossal: return "chambolle-dossal";
    case Variant::Capped: return "capped";
    case Variant::AdaptiveRestart: return "restart";
    case Variant::AdOptSwitch: return "adopt";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Schedule construction

Schedule Schedule::constant(double alpha, StepRule step) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("constant schedule: alpha must lie in [0, 1]");
  }
  Schedule s(Variant::Constant, std::move(step));
  s.alpha_ = alpha;
  return s;
}

Schedule Schedule::fista_bt(StepRule step) { return Schedule(Variant::FistaBT, std::move(step)); }

Schedule Schedule::chambolle_dossal(double a, StepRule step) {
  if (!(a > 2.0)) throw InvalidArgument("chambolle-dossal schedule: requires a > 2");
  Schedule s(Variant::ChambolleDossal, std::move(step));
  s.a_ = a;
  return s;
}

Schedule Schedule::capped(Schedule inner, double cap) {
  if (!(cap >= 0.0 && cap <= 1.0)) throw InvalidArgument("capped schedule: cap must lie in [0, 1]");
  Schedule s(Variant::Capped, inner.step_);
  s.cap_ = cap;
  s.inner_ = std::make_unique<Schedule>(std::move(inner));
  return s;
}

Schedule Schedule::adaptive_restart(Schedule inner) {
  Schedule s(Variant::AdaptiveRestart, inner.step_);
  s.inner_ = std::make_unique<Schedule>(std::move(inner));
  return s;
}

Schedule Schedule::adopt_switch(Schedule inner, MomentumEstimator estimator) {
  if (!estimator) throw InvalidArgument("adopt schedule: missing momentum estimator");
  Schedule s(Variant::AdOptSwitch, inner.step_);
  s.inner_ = std::make_unique<Schedule>(std::move(inner));
  s.estimator_ = std::move(estimator);
  return s;
}

Schedule::Schedule(const Schedule& other)
    : variant_(other.variant_),
      step_(other.step_),
      alpha_(other.alpha_),
      a_(other.a_),
      cap_(other.cap_),
      inner_(other.inner_ ? std::make_unique<Schedule>(*other.inner_) : nullptr),
      estimator_(other.estimator_),
      expected_k_(other.expected_k_),
      t_(other.t_),
      local_k_(other.local_k_),
      switched_(other.switched_),
      fallback_(other.fallback_),
      switched_alpha_(other.switched_alpha_),
      warnings_(other.warnings_) {}

Schedule& Schedule::operator=(const Schedule& other) {
  if (this != &other) {
    Schedule copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Schedule Schedule::fresh() const {
  Schedule s(*this);
  s.expected_k_ = 1;
  s.t_ = 1.0;
  s.local_k_ = 1;
  s.switched_ = false;
  s.fallback_ = false;
  s.switched_alpha_ = 0.0;
  s.warnings_.clear();
  if (s.inner_) *s.inner_ = inner_->fresh();
  return s;
}

bool Schedule::consumes_feedback() const {
  if (variant_ == Variant::AdaptiveRestart || variant_ == Variant::AdOptSwitch) return true;
  return inner_ && inner_->consumes_feedback();
}

// ---------------------------------------------------------------------------
// Parameter generation

void Schedule::restart_momentum() {
  t_ = 1.0;
  local_k_ = 1;
  if (inner_) inner_->restart_momentum();
}

double Schedule::inner_alpha(std::int64_t k, const Feedback& feedback, bool& restarted) {
  const MomentumParams p = inner_->next_params(k, feedback);
  restarted = restarted || p.restarted;
  return p.alpha;
}

MomentumParams Schedule::next_params(std::int64_t k, const Feedback& feedback) {
  if (k != expected_k_) {
    throw InvalidArgument("schedule: expected iteration " + std::to_string(expected_k_) +
                          ", got " + std::to_string(k));
  }
  ++expected_k_;

  MomentumParams out;
  out.lambda = step_.at(k);

  switch (variant_) {
    case Variant::Constant:
      out.alpha = alpha_;
      break;

    case Variant::FistaBT: {
      const double t_next = 0.5 * (1.0 + std::sqrt(4.0 * t_ * t_ + 1.0));
      out.alpha = (t_ - 1.0) / t_next;
      t_ = t_next;
      break;
    }

    case Variant::ChambolleDossal: {
      // t_1 = 1, t_{j+1} = (j + a - 1) / a, counted from the last restart;
      // (t_j - 1) / t_{j+1} simplifies to (j - 2) / (j + a - 1).
      const auto j = static_cast<double>(local_k_);
      out.alpha = local_k_ == 1 ? 0.0 : (j - 2.0) / (j + a_ - 1.0);
      ++local_k_;
      break;
    }

    case Variant::Capped:
      out.alpha = std::min(inner_alpha(k, feedback, out.restarted), cap_);
      break;

    case Variant::AdaptiveRestart:
      if (feedback.signal) {
        inner_->restart_momentum();
        out.restarted = true;
      }
      out.alpha = inner_alpha(k, feedback, out.restarted);
      break;

    case Variant::AdOptSwitch:
      if (!switched_ && !fallback_ && feedback.signal) {
        MomentumEstimate est;
        if (feedback.x == nullptr) {
          est.note = "no iterate supplied with the switch signal";
        } else {
          est = estimator_(*feedback.x, out.lambda);
        }
        if (est.alpha) {
          switched_ = true;
          switched_alpha_ = std::clamp(*est.alpha, 0.0, 1.0);
          out.switched = true;
        } else {
          fallback_ = true;
          warnings_.push_back("iteration " + std::to_string(k) +
                              ": momentum estimate unavailable (" + est.note +
                              "); continuing with adaptive restart");
        }
      }
      if (switched_) {
        // The inner schedule is frozen after the switch.
        out.alpha = switched_alpha_;
      } else {
        if (fallback_ && feedback.signal) {
          inner_->restart_momentum();
          out.restarted = true;
        }
        out.alpha = inner_alpha(k, feedback, out.restarted);
      }
      break;
  }
  return out;
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string Schedule::describe() const {
  switch (variant_) {
    case Variant::Constant: return "constant(alpha=" + shortest(alpha_) + ")";
    case Variant::FistaBT: return "fista-bt";
    case Variant::ChambolleDossal: return "chambolle-dossal(a=" + shortest(a_) + ")";
    case Variant::Capped: return "capped(" + inner_->describe() + ", cap=" + shortest(cap_) + ")";
    case Variant::AdaptiveRestart: return "restart(" + inner_->describe() + ")";
    case Variant::AdOptSwitch: return "adopt(" + inner_->describe() + ")";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Free functions

double optimal_momentum(double l_e, double lambda) {
  if (!(l_e >= 0.0) || !(lambda > 0.0)) {
    throw InvalidArgument("optimal_momentum: requires l_E >= 0 and lambda > 0");
  }
  const double prod = l_e * lambda;
  if (prod > 1.0) {
    throw InvalidArgument("optimal_momentum: l_E * lambda = " + std::to_string(prod) +
                          " exceeds 1 (inconsistent curvature and step size)");
  }
  const double r = std::sqrt(prod);
  return (1.0 - r) / (1.0 + r);
}

bool restart_signal(const Vector& y_next, const Vector& x_next, const Vector& x_curr) {
  if (y_next.size() != x_next.size() || x_next.size() != x_curr.size()) {
    throw InvalidArgument("restart_signal: length mismatch");
  }
  return (y_next - x_next).dot(x_next - x_curr) > 0.0;
}

const char* guarantee_name(Guarantee g) {
  switch (g) {
    case Guarantee::WeakConvergence: return "iterates converge to a minimizer";
    case Guarantee::SummableSteps: return "sum of squared steps is finite";
    case Guarantee::FiniteIdentificationWithBounds:
      return "finite manifold identification with explicit iteration bounds";
    case Guarantee::FiniteIdentificationExistence:
      return "finite manifold identification (existence, no explicit bound)";
    case Guarantee::InverseSquareObjectiveRate: return "O(1/k^2) objective rate";
  }
  return "unknown";
}

bool ValidityReport::has(Guarantee g) const {
  return std::find(guarantees.begin(), guarantees.end(), g) != guarantees.end();
}

namespace {

// Analytic limsup of alpha_k, when the variant determines it without
// runtime feedback.
std::optional<double> analytic_limsup(const Schedule& s) {
  switch (s.variant()) {
    case Variant::Constant: return s.constant_alpha();
    case Variant::FistaBT:
    case Variant::ChambolleDossal: return 1.0;
    case Variant::Capped: {
      auto inner = analytic_limsup(*s.inner());
      if (!inner) return s.cap();
      return std::min(*inner, s.cap());
    }
    case Variant::AdaptiveRestart:
    case Variant::AdOptSwitch: return std::nullopt;
  }
  return std::nullopt;
}

bool is_fista_like(const Schedule& s) {
  return s.variant() == Variant::FistaBT || s.variant() == Variant::ChambolleDossal;
}

}  // namespace

ValidityReport validate(const Schedule& s, std::int64_t horizon, double lipschitz) {
  if (horizon <= 0) throw InvalidArgument("validate: horizon must be positive");
  if (!(lipschitz > 0.0)) throw InvalidArgument("validate: Lipschitz constant must be positive");

  ValidityReport report;
  const double inv_l = 1.0 / lipschitz;
  const double slack = 1e-12;

  // Step sizes: the rule is piecewise constant, so checking piece values is exact.
  const auto& pieces = s.step_rule().pieces();
  bool step_positive = true;
  bool step_bounded = true;
  bool step_nondecreasing = true;
  double step_max = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double v = pieces[i].second;
    step_positive = step_positive && v > 0.0;
    step_bounded = step_bounded && v <= inv_l * (1.0 + slack);
    if (i > 0 && v < pieces[i - 1].second) step_nondecreasing = false;
    step_max = std::max(step_max, v);
  }
  if (!step_positive) report.reasons.emplace_back("step size must be positive");
  if (!step_bounded) report.reasons.emplace_back("step size exceeds 1/L");
  if (!step_nondecreasing) report.reasons.emplace_back("step size sequence decreases");

  // Momentum over the horizon, no feedback.
  Schedule probe = s.fresh();
  bool alpha_in_range = true;
  bool alpha_nondecreasing = true;
  double prev = -1.0;
  report.alpha_lower = 1.0;
  report.alpha_upper = 0.0;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const MomentumParams p = probe.next_params(k, {});
    if (k == 1) {
      report.alpha_first = p.alpha;
      report.lambda_first = p.lambda;
    }
    alpha_in_range = alpha_in_range && p.alpha >= 0.0 && p.alpha <= 1.0;
    if (p.alpha < prev) alpha_nondecreasing = false;
    prev = p.alpha;
    report.alpha_lower = std::min(report.alpha_lower, p.alpha);
    report.alpha_upper = std::max(report.alpha_upper, p.alpha);
  }
  if (!alpha_in_range) report.reasons.emplace_back("alpha_k outside [0, 1]");

  const auto limsup = analytic_limsup(s);
  if (limsup) {
    report.verdict = Verdict::Analytic;
    if (*limsup >= 1.0) {
      report.reasons.emplace_back(is_fista_like(s) || s.variant() == Variant::Capped
                                      ? "limsup alpha = 1 (alpha_k -> 1)"
                                      : "limsup alpha = 1");
    }
    if (s.variant() == Variant::Constant) {
      report.alpha_lower = report.alpha_upper = s.constant_alpha();
    }
  } else {
    report.verdict = Verdict::HorizonOnly;
    report.reasons.emplace_back("limsup alpha < 1 cannot be certified: momentum depends on runtime feedback");
  }
  report.convergence_ok = report.reasons.empty();

  const bool steps_ok = step_positive && step_bounded && step_nondecreasing;
  if (report.convergence_ok) {
    report.guarantees.push_back(Guarantee::SummableSteps);
    report.guarantees.push_back(Guarantee::WeakConvergence);
    if (s.variant() == Variant::Constant && s.constant_alpha() > 0.0) {
      report.guarantees.push_back(Guarantee::FiniteIdentificationWithBounds);
    } else {
      report.guarantees.push_back(Guarantee::FiniteIdentificationExistence);
    }
  } else if (is_fista_like(s) && steps_ok) {
    report.guarantees.push_back(Guarantee::InverseSquareObjectiveRate);
    if (s.variant() == Variant::ChambolleDossal) {
      report.guarantees.push_back(Guarantee::WeakConvergence);
    }
    report.guarantees.push_back(Guarantee::FiniteIdentificationExistence);
  }

  // Splitting inertial method conditions.
  const double sipm_bound = limsup ? std::max(*limsup, report.alpha_upper) : report.alpha_upper;
  if (!(sipm_bound < 1.0 / 3.0)) report.sipm_reasons.emplace_back("alpha must stay below 1/3");
  if (!alpha_nondecreasing) report.sipm_reasons.emplace_back("alpha_k must be nondecreasing");
  if (!step_positive || !(step_max < 2.0 * inv_l)) {
    report.sipm_reasons.emplace_back("step size must lie in (0, 2/L)");
  }
  if (!limsup) report.sipm_reasons.emplace_back("momentum depends on runtime feedback");
  report.sipm_ok = report.sipm_reasons.empty();
  return report;
}

}  // namespace ifbs
