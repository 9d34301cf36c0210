#include "ifbs/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ifbs/errors.hpp"
#include "ifbs/prox.hpp"

namespace ifbs {

namespace {

void check_state(const CompositeProblem& p, const SolverState& s) {
  const Index n = p.dimension();
  if (s.x_curr.size() != n || s.x_prev.size() != n) {
    throw InvalidArgument("solver state has length " + std::to_string(s.x_curr.size()) +
                          ", problem dimension is " + std::to_string(n));
  }
}

void check_params(double alpha, double lambda) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("step: alpha must lie in [0, 1]");
  if (!(lambda > 0.0)) throw InvalidArgument("step: lambda must be positive");
}

void check_finite(const SolverState& s) {
  if (!s.x_curr.allFinite() || !s.forward.allFinite()) {
    throw NumericalFailure("non-finite iterate at k = " + std::to_string(s.k) +
                           "; run aborted");
  }
}

bool same_support(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if ((a(i) != 0.0) != (b(i) != 0.0)) return false;
  }
  return true;
}

}  // namespace

SolverState SolverState::initial(const Vector& x0) {
  SolverState s;
  s.x_curr = x0;
  s.x_prev = x0;
  s.y_curr = x0;
  s.forward = x0;
  s.k = 1;
  return s;
}

SolverState ifbs_step(const CompositeProblem& p, const SolverState& s, double alpha,
                      double lambda) {
  check_state(p, s);
  check_params(alpha, lambda);
  SolverState next;
  next.y_curr = s.x_curr + alpha * (s.x_curr - s.x_prev);
  next.forward = next.y_curr - lambda * p.smooth->gradient(next.y_curr);
  next.x_curr = prox_l1(next.forward, lambda * p.rho);
  next.x_prev = s.x_curr;
  next.k = s.k + 1;
  next.last_alpha = alpha;
  next.last_lambda = lambda;
  check_finite(next);
  return next;
}

SolverState sipm_step(const CompositeProblem& p, const SolverState& s, double alpha,
                      double lambda) {
  check_state(p, s);
  check_params(alpha, lambda);
  SolverState next;
  const Vector momentum = alpha * (s.x_curr - s.x_prev);
  next.y_curr = s.x_curr + momentum;
  next.forward = s.x_curr - lambda * p.smooth->gradient(s.x_curr) + momentum;
  next.x_curr = prox_l1(next.forward, lambda * p.rho);
  next.x_prev = s.x_curr;
  next.k = s.k + 1;
  next.last_alpha = alpha;
  next.last_lambda = lambda;
  check_finite(next);
  return next;
}

double lyapunov_energy(const CompositeProblem& p, const SolverState& s, double alpha,
                       double lambda) {
  check_state(p, s);
  if (!(lambda > 0.0)) throw InvalidArgument("lyapunov_energy: lambda must be positive");
  const double kinetic = alpha / (2.0 * lambda) * (s.x_curr - s.x_prev).squaredNorm();
  return kinetic + objective(p, s.x_curr);
}

const char* algorithm_name(Algorithm a) { return a == Algorithm::IFBS ? "ifbs" : "sipm"; }

SolverTrace run(const CompositeProblem& p, Schedule schedule, const Vector& x0,
                const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (x0.size() != p.dimension()) {
    throw InvalidArgument("run: x0 has length " + std::to_string(x0.size()) +
                          ", problem dimension is " + std::to_string(p.dimension()));
  }
  if (!x0.allFinite()) throw InvalidArgument("run: x0 must be finite");
  const TerminationRule& term = options.termination;
  if (term.max_iter < 0) throw InvalidArgument("run: max_iter must be nonnegative");
  if (term.target_gap && !term.f_ref) {
    throw InvalidArgument("run: target_gap requires a reference objective value");
  }

  SolverTrace trace;
  trace.algorithm = options.algorithm;
  trace.schedule = schedule.describe();
  trace.f_ref = term.f_ref;
  trace.snapshot_stride = options.snapshot_stride;

  const auto step = options.algorithm == Algorithm::IFBS ? ifbs_step : sipm_step;
  SolverState state = SolverState::initial(x0);
  double f_curr = objective(p, state.x_curr);

  if (term.max_iter == 0) {
    trace.final_x = state.x_curr;
    trace.final_objective = f_curr;
    trace.termination = "max_iter";
    return trace;
  }

  // The forward point of x^1 is only used by diagnostics.
  bool first = true;
  Feedback feedback{false, &state.x_curr};
  while (true) {
    const std::int64_t k = state.k;
    feedback.x = &state.x_curr;
    const MomentumParams params = schedule.next_params(k, feedback);
    if (first) {
      state.forward = state.x_curr - params.lambda * p.smooth->gradient(state.x_curr);
      first = false;
    }

    TraceRow row;
    row.k = k;
    row.objective = f_curr;
    row.gap = term.f_ref ? f_curr - *term.f_ref : std::numeric_limits<double>::quiet_NaN();
    row.step_norm = (state.x_curr - state.x_prev).norm();
    row.alpha = params.alpha;
    row.lambda = params.lambda;
    row.energy = params.alpha / (2.0 * params.lambda) * row.step_norm * row.step_norm + f_curr;
    row.restart = params.restarted;
    row.switched = params.switched;
    row.support_size = static_cast<Index>((state.x_curr.array() != 0.0).count());
    row.support_changed = k > 1 && !same_support(state.x_curr, state.x_prev);
    trace.rows.push_back(row);

    if (options.snapshot_stride > 0 && (k - 1) % options.snapshot_stride == 0) {
      trace.snapshots.push_back({k, state.x_curr, state.y_curr, state.forward});
    }

    if (term.target_gap && row.gap <= *term.target_gap) {
      trace.termination = "target_gap";
      break;
    }
    if (term.step_tol && k > 1 && row.step_norm <= *term.step_tol) {
      trace.termination = "step_tol";
      break;
    }
    if (k - 1 >= term.max_iter) {
      trace.termination = "max_iter";
      break;
    }

    SolverState next = step(p, state, params.alpha, params.lambda);
    const double f_next = objective(p, next.x_curr);
    if (!std::isfinite(f_next)) {
      throw NumericalFailure("non-finite objective at k = " + std::to_string(next.k) +
                             "; run aborted");
    }
    bool signal = false;
    if (schedule.consumes_feedback()) {
      signal = options.restart_test == RestartTest::InnerProduct
                   ? restart_signal(next.y_curr, next.x_curr, state.x_curr)
                   : f_next > f_curr;
    }
    state = std::move(next);
    f_curr = f_next;
    feedback.signal = signal;
  }

  trace.final_x = state.x_curr;
  trace.iterations = state.k - 1;
  trace.final_objective = f_curr;
  trace.warnings = schedule.warnings();
  trace.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

}  // namespace ifbs
