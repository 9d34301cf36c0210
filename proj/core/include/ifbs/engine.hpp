#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ifbs/model.hpp"
#include "ifbs/schedule.hpp"

namespace ifbs {

/// Iterates of one run at index k.
///
/// `forward` is the prox argument that produced x_curr (for k = 1, the
/// forward point of x_curr itself with the first step size), used by the
/// sign-identification diagnostic.
struct SolverState {
  Vector x_curr;
  Vector x_prev;
  Vector y_curr;
  Vector forward;
  std::int64_t k = 1;
  double last_alpha = 0.0;
  double last_lambda = 0.0;

  // x^1 = x^0 = y^1 = x0.
  static SolverState initial(const Vector& x0);
};

// y = x + alpha (x - x_prev); x_next = prox_{lambda rho}(y - lambda grad f(y)).
SolverState ifbs_step(const CompositeProblem& p, const SolverState& s, double alpha,
                      double lambda);

// x_next = prox_{lambda rho}(x - lambda grad f(x) + alpha (x - x_prev)).
SolverState sipm_step(const CompositeProblem& p, const SolverState& s, double alpha,
                      double lambda);

// (alpha / (2 lambda)) ||x^k - x^{k-1}||^2 + F(x^k).
double lyapunov_energy(const CompositeProblem& p, const SolverState& s, double alpha,
                       double lambda);

enum class Algorithm { IFBS, SIPM };
enum class RestartTest { InnerProduct, ObjectiveIncrease };

const char* algorithm_name(Algorithm a);

struct TerminationRule {
  std::int64_t max_iter = 1000;
  std::optional<double> target_gap;
  std::optional<double> f_ref;
  std::optional<double> step_tol;
};

struct RunOptions {
  Algorithm algorithm = Algorithm::IFBS;
  TerminationRule termination;
  RestartTest restart_test = RestartTest::InnerProduct;
  // Store iterates every `snapshot_stride` iterations (0 disables).
  std::int64_t snapshot_stride = 0;
};

struct TraceRow {
  std::int64_t k = 0;
  double objective = 0.0;
  double gap = 0.0;  // NaN without a reference value
  double step_norm = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double energy = 0.0;
  bool restart = false;
  bool switched = false;
  Index support_size = 0;
  bool support_changed = false;
};

struct Snapshot {
  std::int64_t k = 0;
  Vector x;
  Vector y;
  Vector forward;
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  std::vector<Snapshot> snapshots;
  std::int64_t snapshot_stride = 0;

  Vector final_x;
  std::int64_t iterations = 0;
  double final_objective = 0.0;
  std::string termination;
  std::vector<std::string> warnings;
  std::optional<double> f_ref;
  double elapsed_seconds = 0.0;

  Algorithm algorithm = Algorithm::IFBS;
  std::string schedule;

  bool dense_snapshots() const { return snapshot_stride == 1; }
};

/// Runs I-FBS or SIPM from x^1 = x^0 = x0 until the termination rule fires.
///
/// Row k records x^k together with the (alpha_k, lambda_k) the schedule
/// emits at k, i.e. the parameters used to produce x^{k+1}. Throws
/// NumericalFailure on a non-finite iterate.
SolverTrace run(const CompositeProblem& p, Schedule schedule, const Vector& x0,
                const RunOptions& options);

}  // namespace ifbs
