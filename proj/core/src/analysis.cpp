#include "ifbs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ifbs/errors.hpp"
#include "ifbs/linalg.hpp"
#include "ifbs/prox.hpp"
#include "ifbs/schedule.hpp"

namespace ifbs {

// ---------------------------------------------------------------------------
// Reference solutions

double duality_gap(const L1LSInstance& inst, const Vector& x) {
  const Vector r = inst.least_squares().residual(x);
  const Vector g = inst.a().transpose() * r;
  const double rho = inst.rho();
  const double g_inf = g.lpNorm<Eigen::Infinity>();
  const double s = g_inf > rho ? rho / g_inf : 1.0;
  // F(x) + 1/2 ||s r||^2 + <b, s r> rewritten with b = A x - r as
  //   1/2 (1 - s)^2 ||r||^2 + sum_i |x_i| (rho + s g_i sgn(x_i)),
  // a sum of nonnegative terms, which avoids cancelling two O(F) values.
  double gap = 0.5 * (1.0 - s) * (1.0 - s) * r.squaredNorm();
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) gap += std::abs(x(i)) * (rho + s * g(i) * sign_of(x(i)));
  }
  return gap;
}

namespace {

// Solves the stationarity conditions on supp(x) with the signs of x fixed:
//   A_S^T A_S z = A_S^T b - rho sgn(x_S).
// Returns nothing when a coordinate flips sign.
std::optional<Vector> polish_on_support(const L1LSInstance& inst, const Vector& x) {
  const IndexSet s = support_of(x);
  if (s.empty() || static_cast<Index>(s.size()) > linalg::kDefaultRestrictedCap) return std::nullopt;
  const Matrix as = linalg::restrict_columns(inst.a(), s);
  Vector sign(static_cast<Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) sign(static_cast<Index>(j)) = sign_of(x(s[j]));
  const Matrix gram = as.transpose() * as;
  const Vector rhs = as.transpose() * inst.b() - inst.rho() * sign;
  const Vector z = gram.completeOrthogonalDecomposition().solve(rhs);
  if (!z.allFinite()) return std::nullopt;
  Vector out = Vector::Zero(x.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double zj = z(static_cast<Index>(j));
    if (zj != 0.0 && sign_of(zj) != sign(static_cast<Index>(j))) return std::nullopt;
    out(s[j]) = zj;
  }
  return out;
}

constexpr std::int64_t kPolishEvery = 100;

}  // namespace

ReferenceSolution reference_solve(const L1LSInstance& inst, double gap_tol,
                                  const ReferenceOptions& options) {
  if (!(gap_tol > 0.0)) throw InvalidArgument("reference_solve: gap_tol must be positive");
  const CompositeProblem& p = inst.problem();
  const double lambda = 1.0 / inst.lipschitz();

  Schedule schedule = Schedule::adaptive_restart(Schedule::fista_bt(StepRule::constant(lambda)));
  SolverState state = SolverState::initial(Vector::Zero(inst.cols()));

  Vector best_x = state.x_curr;
  double best_gap = duality_gap(inst, best_x);
  bool polished = false;

  auto consider = [&](const Vector& candidate, bool from_polish) {
    const double g = duality_gap(inst, candidate);
    if (g < best_gap) {
      best_gap = g;
      best_x = candidate;
      polished = from_polish;
    }
  };

  std::int64_t k = 1;
  Feedback feedback;
  for (; k <= options.max_iter && best_gap > gap_tol; ++k) {
    feedback.x = &state.x_curr;
    const MomentumParams params = schedule.next_params(k, feedback);
    SolverState next = ifbs_step(p, state, params.alpha, params.lambda);
    feedback.signal = restart_signal(next.y_curr, next.x_curr, state.x_curr);
    state = std::move(next);
    consider(state.x_curr, false);
    if (options.polish && best_gap > gap_tol && k % kPolishEvery == 0) {
      if (auto c = polish_on_support(inst, state.x_curr)) consider(*c, true);
    }
  }
  if (options.polish) {
    if (auto c = polish_on_support(inst, best_x)) consider(*c, true);
  }
  if (best_gap > gap_tol) {
    throw NumericalFailure("reference_solve: duality gap " + std::to_string(best_gap) +
                               " above tolerance after " + std::to_string(k - 1) + " iterations",
                           best_gap);
  }

  ReferenceSolution ref;
  ref.x_star = best_x;
  ref.duality_gap = best_gap;
  ref.f_star = objective(p, best_x) - best_gap;
  ref.h_star = inst.least_squares().gradient(best_x);
  ref.iterations = k - 1;
  ref.polished = polished;
  return ref;
}

// ---------------------------------------------------------------------------
// Manifold diagnostics

ManifoldClassification classify_de(const Vector& h_star, double rho, double threshold) {
  if (!(rho > 0.0)) throw InvalidArgument("classify_de: rho must be positive");
  if (!(threshold > 0.0)) throw InvalidArgument("classify_de: threshold must be positive");
  ManifoldClassification out;
  out.threshold = threshold;
  for (Index i = 0; i < h_star.size(); ++i) {
    const double margin = rho - std::abs(h_star(i));
    if (margin <= threshold) {
      out.e.push_back(i);
    } else {
      out.d.push_back(i);
      out.omega = std::min(out.omega, margin);
    }
  }
  return out;
}

IdentificationBounds identification_bounds(const BoundInputs& in) {
  if (!(in.alpha_lower > 0.0)) {
    throw InvalidArgument("identification_bounds: the lower momentum bound must be positive");
  }
  if (!(in.alpha_lower <= in.alpha_upper && in.alpha_upper < 1.0)) {
    throw InvalidArgument("identification_bounds: requires 0 < alpha_lower <= alpha_upper < 1");
  }
  if (!(in.lambda1 > 0.0) || !(in.rho > 0.0) || !(in.lipschitz > 0.0)) {
    throw InvalidArgument("identification_bounds: lambda1, rho and L must be positive");
  }
  const double al = in.alpha_lower;
  const double au = in.alpha_upper;
  const double lyap = in.objective_gap1 + in.alpha1 / (2.0 * in.lambda1) * in.delta1_sq;
  const double bracket = 2.0 * au * (1.0 + au) * lyap / (al * (1.0 - au) * in.lipschitz * in.lipschitz) +
                         in.dist1_sq - au * in.dist0_sq;
  const double tail = al / (1.0 - al);
  const double l1_sq = in.lambda1 * in.lambda1;

  IdentificationBounds out;
  out.k_e = bracket / (in.rho * in.rho * l1_sq) + tail;
  out.k_d = (std::isfinite(in.omega) ? bracket / (in.omega * in.omega * l1_sq) : 0.0) + tail + 2.0;
  return out;
}

ManifoldReport detect_identification(const SolverTrace& trace, const ManifoldClassification& de,
                                     const Vector& h_star, double rho) {
  if (!trace.dense_snapshots() || trace.snapshots.empty()) {
    throw InvalidArgument(
        "detect_identification: needs iterate snapshots at every iteration; rerun with "
        "snapshot stride 1");
  }
  ManifoldReport report;
  report.d = de.d;
  report.e = de.e;
  report.omega = de.omega;
  report.e_threshold = de.threshold;
  report.window_first = trace.snapshots.front().k;
  report.window_last = trace.snapshots.back().k;

  std::optional<std::int64_t> last_sign_violation;
  std::optional<std::int64_t> last_support_violation;
  for (const Snapshot& s : trace.snapshots) {
    bool sign_ok = true;
    for (Index i : de.e) {
      if (sign_of(s.forward(i)) != sign_of(-h_star(i) / rho)) {
        sign_ok = false;
        break;
      }
    }
    bool support_ok = true;
    for (Index i : de.d) {
      if (s.x(i) != 0.0 || s.y(i) != 0.0) {
        support_ok = false;
        break;
      }
    }
    if (!sign_ok) last_sign_violation = s.k;
    if (!support_ok) last_support_violation = s.k;
  }

  auto resolve = [&](const std::optional<std::int64_t>& last) -> std::optional<std::int64_t> {
    if (!last) return std::int64_t{1};
    if (*last >= report.window_last) return std::nullopt;
    return std::max<std::int64_t>(1, *last);
  };
  report.k_sign = resolve(last_sign_violation);
  report.k_support = resolve(last_support_violation);
  report.note = "identification measured over iterations " + std::to_string(report.window_first) +
                ".." + std::to_string(report.window_last);
  return report;
}

// ---------------------------------------------------------------------------
// Rates and oscillations

OscillationReport detect_oscillations(std::span<const std::int64_t> ks,
                                      std::span<const double> values, std::int64_t start_k) {
  if (ks.size() != values.size()) throw InvalidArgument("detect_oscillations: length mismatch");
  std::size_t first = 0;
  while (first < ks.size() && ks[first] <= start_k) ++first;
  if (ks.size() - first < 3) {
    throw InvalidArgument("detect_oscillations: fewer than 3 points after the start index");
  }
  OscillationReport out;
  for (std::size_t i = first + 1; i + 1 < ks.size(); ++i) {
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) out.maxima.push_back(ks[i]);
  }
  out.count = static_cast<std::int64_t>(out.maxima.size());
  if (out.maxima.size() >= 2) {
    out.mean_period = static_cast<double>(out.maxima.back() - out.maxima.front()) /
                      static_cast<double>(out.maxima.size() - 1);
  }
  return out;
}

RateReport fit_local_rate(std::span<const std::int64_t> ks, std::span<const double> gaps,
                          const RateOptions& options) {
  if (ks.size() != gaps.size()) throw InvalidArgument("fit_local_rate: length mismatch");
  if (!(options.window_fraction > 0.0 && options.window_fraction <= 1.0)) {
    throw InvalidArgument("fit_local_rate: window_fraction must lie in (0, 1]");
  }
  const double floor = std::max(1e-15, options.gap_floor);

  std::size_t first = 0;
  while (first < ks.size() && ks[first] < options.start_k) ++first;
  std::size_t end = first;
  while (end < ks.size() && std::isfinite(gaps[end]) && gaps[end] > floor) ++end;
  const std::size_t usable = end - first;
  if (usable < 10) {
    throw NumericalFailure("fit_local_rate: only " + std::to_string(usable) +
                           " usable gap values after the start index (need 10)");
  }
  const auto window = std::min<std::size_t>(
      usable, std::max<std::size_t>(10, static_cast<std::size_t>(
                                            std::ceil(options.window_fraction * static_cast<double>(usable)))));
  const std::size_t lo = end - window;

  double mean_k = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = lo; i < end; ++i) {
    mean_k += static_cast<double>(ks[i]);
    mean_y += std::log(gaps[i]);
  }
  mean_k /= static_cast<double>(window);
  mean_y /= static_cast<double>(window);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = lo; i < end; ++i) {
    const double dk = static_cast<double>(ks[i]) - mean_k;
    const double dy = std::log(gaps[i]) - mean_y;
    sxx += dk * dk;
    sxy += dk * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - slope * sxy);

  RateReport report;
  report.fitted_rate = std::exp(slope);
  report.fit_first = ks[lo];
  report.fit_last = ks[end - 1];
  report.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  report.theoretical_rate = options.theoretical_rate;
  if (end - first >= 3) {
    const auto osc = detect_oscillations(ks.subspan(first, end - first),
                                         gaps.subspan(first, end - first), ks[first] - 1);
    report.oscillation_count = osc.count;
    report.mean_oscillation_period = osc.mean_period;
  }
  return report;
}

RateReport fit_local_rate(const SolverTrace& trace, const RateOptions& options) {
  std::vector<std::int64_t> ks;
  std::vector<double> gaps;
  ks.reserve(trace.rows.size());
  gaps.reserve(trace.rows.size());
  for (const TraceRow& r : trace.rows) {
    ks.push_back(r.k);
    gaps.push_back(r.gap);
  }
  return fit_local_rate(ks, gaps, options);
}

// ---------------------------------------------------------------------------
// Local problem

LocalProblem::LocalProblem(const L1LSInstance& inst, const Vector& h_star, IndexSet e)
    : inst_(&inst), e_(std::move(e)) {
  if (e_.empty()) throw InvalidArgument("LocalProblem: E is empty");
  a_e_ = linalg::restrict_columns(inst.a(), e_);
  h_e_.resize(static_cast<Index>(e_.size()));
  for (std::size_t j = 0; j < e_.size(); ++j) {
    h_e_(static_cast<Index>(j)) = h_star(e_[j]);
    orthant_sign_.push_back(-sign_of(h_star(e_[j])));
  }
}

double LocalProblem::value(const Vector& x_e) const {
  return -h_e_.dot(x_e) + 0.5 * (a_e_ * x_e - inst_->b()).squaredNorm();
}

Vector LocalProblem::gradient(const Vector& x_e) const {
  return -h_e_ + a_e_.transpose() * (a_e_ * x_e - inst_->b());
}

double LocalProblem::strong_convexity() const {
  return linalg::smallest_restricted_eigenvalue(inst_->a(), e_);
}

double LocalProblem::smallest_nonzero_curvature(double zero_tol) const {
  return linalg::smallest_nonzero_restricted_eigenvalue(inst_->a(), e_, zero_tol);
}

Vector LocalProblem::projected_step(const Vector& x_e, const Vector& x_prev_e, double alpha,
                                    double lambda) const {
  const Vector y = x_e + alpha * (x_e - x_prev_e);
  SignPattern s{e_, orthant_sign_};
  return project_orthant(y - lambda * gradient(y), s);
}

Vector LocalProblem::restrict(const Vector& x) const {
  Vector out(static_cast<Index>(e_.size()));
  for (std::size_t j = 0; j < e_.size(); ++j) out(static_cast<Index>(j)) = x(e_[j]);
  return out;
}

Vector LocalProblem::embed(const Vector& x_e) const {
  Vector out = Vector::Zero(inst_->cols());
  for (std::size_t j = 0; j < e_.size(); ++j) out(e_[j]) = x_e(static_cast<Index>(j));
  return out;
}

StepSumBounds step_sum_bounds(double lipschitz, double alpha_lower, double alpha_upper,
                              double alpha1, double lambda1, double objective_gap1,
                              double delta1_sq) {
  if (!(lipschitz > 0.0) || !(lambda1 > 0.0)) {
    throw InvalidArgument("step_sum_bounds: L and lambda1 must be positive");
  }
  if (!(alpha_lower >= 0.0 && alpha_lower <= alpha_upper && alpha_upper < 1.0)) {
    throw InvalidArgument("step_sum_bounds: requires 0 <= alpha_lower <= alpha_upper < 1");
  }
  const double c = objective_gap1 + alpha1 / (2.0 * lambda1) * delta1_sq;
  StepSumBounds out;
  const double denom1 = 2.0 * lipschitz * (1.0 - alpha_upper) - 1.0;
  if (denom1 > 0.0) out.first = 2.0 / denom1 * c;
  if (alpha_lower > 0.0) {
    out.second = 2.0 / (lipschitz * lipschitz * alpha_lower * (1.0 - alpha_upper)) * c;
  }
  return out;
}

IndexSet support_of(const Vector& x) {
  IndexSet s;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) s.push_back(i);
  }
  return s;
}

MomentumEstimator support_momentum_estimator(const L1LSInstance& inst, double singular_tol) {
  return [inst, singular_tol](const Vector& x, double lambda) -> MomentumEstimate {
    const IndexSet s = support_of(x);
    if (s.empty()) return {std::nullopt, "empty support"};
    if (static_cast<Index>(s.size()) > linalg::kDefaultRestrictedCap) {
      return {std::nullopt, "support of size " + std::to_string(s.size()) + " exceeds the eigensolve cap"};
    }
    const double l = linalg::smallest_restricted_eigenvalue(inst.a(), s);
    if (!(l > singular_tol)) {
      return {std::nullopt, "restricted Gram matrix on a support of size " + std::to_string(s.size()) +
                                " is singular"};
    }
    return {optimal_momentum(std::min(l, 1.0 / lambda), lambda), ""};
  };
}

}  // namespace ifbs
