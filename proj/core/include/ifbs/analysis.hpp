#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifbs/engine.hpp"
#include "ifbs/model.hpp"
#include "ifbs/schedule.hpp"

namespace ifbs {

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

/// Duality gap of l1-LS at x using the scaled-residual dual point
/// nu = min(1, rho / ||A^T r||_inf) r with r = A x - b:
///   gap(x) = F(x) + 1/2 ||nu||^2 + <b, nu>.
double duality_gap(const L1LSInstance& inst, const Vector& x);

struct ReferenceSolution {
  Vector x_star;
  // F(x_star) - duality_gap: a certified lower bound on the optimal value.
  double f_star = 0.0;
  double duality_gap = 0.0;
  Vector h_star;  // grad f(x_star)
  std::int64_t iterations = 0;
  bool polished = false;
};

struct ReferenceOptions {
  std::int64_t max_iter = 2'000'000;
  // Try an active-set refinement on supp(x) after the first-order solve.
  bool polish = true;
};

/// Restarted FISTA (restart on <y - x+, x+ - x> > 0, lambda = 1/L) until
/// the duality gap is <= gap_tol, followed by an optional sign-fixed
/// least-squares polish kept only when it lowers the gap. Throws
/// NumericalFailure (carrying the best gap) if max_iter runs out.
ReferenceSolution reference_solve(const L1LSInstance& inst, double gap_tol,
                                  const ReferenceOptions& options = {});

// ---------------------------------------------------------------------------
// Manifold diagnostics
// ---------------------------------------------------------------------------

inline constexpr double kDefaultEThreshold = 1e-4;

struct ManifoldClassification {
  IndexSet d;
  IndexSet e;
  // min over D of rho - |h*_i|; +inf when D is empty.
  double omega = std::numeric_limits<double>::infinity();
  double threshold = kDefaultEThreshold;
};

// E = {i : rho - |h*_i| <= threshold}, D = the rest.
ManifoldClassification classify_de(const Vector& h_star, double rho,
                                   double threshold = kDefaultEThreshold);

/// Inputs of the explicit identification bounds for a constant momentum
/// band alpha_lower <= alpha_k <= alpha_upper.
struct BoundInputs {
  double rho = 0.0;
  double lipschitz = 0.0;
  double lambda1 = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double alpha1 = 0.0;
  double objective_gap1 = 0.0;  // F(x^1) - F*
  double delta1_sq = 0.0;       // ||x^1 - x^0||^2
  double dist1_sq = 0.0;        // ||x^1 - x*||^2
  double dist0_sq = 0.0;        // ||x^0 - x*||^2
  double omega = std::numeric_limits<double>::infinity();
};

struct IdentificationBounds {
  double k_e = 0.0;  // sign identification on E
  double k_d = 0.0;  // zeros on D
};

/// Upper bounds on the identification iterations:
///   K_E = B / (rho^2 lambda1^2) + a/(1-a)
///   K_D = B / (omega^2 lambda1^2) + a/(1-a) + 2
/// with a = alpha_lower and
///   B = 2 au (1+au) (F(x^1)-F* + alpha1/(2 lambda1) ||D1||^2) / (a (1-au) L^2)
///       + ||x^1-x*||^2 - au ||x^0-x*||^2.
/// Rejects alpha_lower = 0. An infinite omega (empty D) drops the first K_D term.
IdentificationBounds identification_bounds(const BoundInputs& in);

struct ManifoldReport {
  IndexSet d;
  IndexSet e;
  double omega = std::numeric_limits<double>::infinity();
  double e_threshold = kDefaultEThreshold;
  std::optional<std::int64_t> k_sign;
  std::optional<std::int64_t> k_support;
  std::optional<double> bound_k_e;
  std::optional<double> bound_k_d;
  std::int64_t window_first = 0;
  std::int64_t window_last = 0;
  std::string note;
};

/// Finds the smallest K >= 1 such that, for every recorded k > K,
///   sign condition: sgn(forward_i^k) = -h*_i / rho for all i in E, and
///   support condition: x_i^k = y_i^k = 0 exactly for all i in D.
/// A condition violated at the last recorded iterate is reported as not
/// identified. Requires dense snapshots (stride 1).
ManifoldReport detect_identification(const SolverTrace& trace,
                                     const ManifoldClassification& de,
                                     const Vector& h_star, double rho);

// ---------------------------------------------------------------------------
// Rates and oscillations
// ---------------------------------------------------------------------------

struct RateOptions {
  double window_fraction = 0.5;
  std::int64_t start_k = 1;  // first post-identification iteration
  // Gaps at or below max(1e-15, gap_floor) end the usable window.
  double gap_floor = 0.0;
  std::optional<double> theoretical_rate;
};

struct RateReport {
  double fitted_rate = 1.0;
  std::int64_t fit_first = 0;
  std::int64_t fit_last = 0;
  double r_squared = 1.0;
  std::optional<double> theoretical_rate;
  std::int64_t oscillation_count = 0;
  std::optional<double> mean_oscillation_period;
};

/// Least-squares fit of log(gap_k) against k over the final window_fraction
/// of usable iterations after start_k; fitted_rate = exp(slope). Throws
/// NumericalFailure with fewer than 10 usable points.
RateReport fit_local_rate(std::span<const std::int64_t> ks, std::span<const double> gaps,
                          const RateOptions& options);
RateReport fit_local_rate(const SolverTrace& trace, const RateOptions& options);

struct OscillationReport {
  std::int64_t count = 0;
  std::optional<double> mean_period;
  std::vector<std::int64_t> maxima;
};

/// Strict local maxima of values over k > start_k (k taken from ks).
/// Throws InvalidArgument when fewer than 3 points fall in the window.
OscillationReport detect_oscillations(std::span<const std::int64_t> ks,
                                      std::span<const double> values, std::int64_t start_k);

// ---------------------------------------------------------------------------
// Local problem on E
// ---------------------------------------------------------------------------

/// phi(x_E) = -h*_E^T x_E + f((x_E, 0)) restricted to the E coordinates,
/// minimized over the orthant {-sgn(h*_i) x_i >= 0}.
class LocalProblem {
 public:
  LocalProblem(const L1LSInstance& inst, const Vector& h_star, IndexSet e);

  double value(const Vector& x_e) const;
  Vector gradient(const Vector& x_e) const;

  // Strong convexity of phi: lambda_min(A_E^T A_E).
  double strong_convexity() const;
  // Smallest nonzero eigenvalue of A_E^T A_E.
  double smallest_nonzero_curvature(double zero_tol = 1e-10) const;

  // y = x + alpha (x - x_prev); P_O(y - lambda grad phi(y)).
  Vector projected_step(const Vector& x_e, const Vector& x_prev_e, double alpha,
                        double lambda) const;

  const IndexSet& e() const { return e_; }
  Vector restrict(const Vector& x) const;
  Vector embed(const Vector& x_e) const;

 private:
  const L1LSInstance* inst_;
  Matrix a_e_;
  Vector h_e_;
  IndexSet e_;
  std::vector<int> orthant_sign_;
};

/// Explicit bounds on sum_k ||x^k - x^{k-1}||^2 for alpha_k in
/// [alpha_lower, alpha_upper]:
///   first:  2 / (2L(1-au) - 1) * C, only when 2L(1-au) > 1;
///   second: 2 / (L^2 al (1-au)) * C, only when al > 0;
/// with C = F(x^1) - F* + alpha1/(2 lambda1) ||x^1 - x^0||^2.
struct StepSumBounds {
  std::optional<double> first;
  std::optional<double> second;
};

StepSumBounds step_sum_bounds(double lipschitz, double alpha_lower, double alpha_upper,
                              double alpha1, double lambda1, double objective_gap1,
                              double delta1_sq);

// Indices with x_i != 0.
IndexSet support_of(const Vector& x);

/// Momentum estimator for the switching schedule: optimal_momentum of
/// lambda_min(A_S^T A_S) with S = supp(x). The estimate is unavailable when
/// S is empty, larger than the eigensolve cap, or the restricted Gram
/// matrix has lambda_min <= singular_tol. Holds a copy of the instance.
MomentumEstimator support_momentum_estimator(const L1LSInstance& inst,
                                             double singular_tol = 1e-12);

}  // namespace ifbs
