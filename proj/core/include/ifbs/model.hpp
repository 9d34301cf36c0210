#pragma once

#include <cstdint>
#include <memory>

#include "ifbs/types.hpp"

namespace ifbs {

/// Smooth convex part f of a composite objective.
///
/// Implementations must have an L-Lipschitz gradient with L reported by
/// lipschitz_constant(), and must be safe to call concurrently.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual double lipschitz_constant() const = 0;
};

/// f(x) = 1/2 ||b - A x||^2 with L = lambda_max(A^T A) computed once.
class LeastSquares final : public SmoothOracle {
 public:
  LeastSquares(Matrix a, Vector b);

  Index dimension() const override { return a_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double lipschitz_constant() const override { return lipschitz_; }

  // Residual A x - b.
  Vector residual(const Vector& x) const;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  Matrix a_;
  Vector b_;
  double lipschitz_;
};

/// F(x) = f(x) + rho ||x||_1.
struct CompositeProblem {
  CompositeProblem(std::shared_ptr<const SmoothOracle> smooth, double rho);

  std::shared_ptr<const SmoothOracle> smooth;
  double rho;

  Index dimension() const { return smooth->dimension(); }
  double lipschitz() const { return smooth->lipschitz_constant(); }
};

double objective(const CompositeProblem& p, const Vector& x);
Vector gradient_smooth(const CompositeProblem& p, const Vector& x);

/// l1-regularized least squares: 1/2 ||b - A x||^2 + rho ||x||_1.
class L1LSInstance {
 public:
  L1LSInstance(Matrix a, Vector b, double rho);

  const Matrix& a() const { return ls_->a(); }
  const Vector& b() const { return ls_->b(); }
  double rho() const { return problem_.rho; }
  double lipschitz() const { return ls_->lipschitz_constant(); }
  Index rows() const { return ls_->a().rows(); }
  Index cols() const { return ls_->a().cols(); }

  const LeastSquares& least_squares() const { return *ls_; }
  const CompositeProblem& problem() const { return problem_; }

 private:
  std::shared_ptr<const LeastSquares> ls_;
  CompositeProblem problem_;
};

struct InstanceSpec {
  Index m = 300;
  Index n = 2000;
  Index sparsity = 50;
  double entry_std = 0.1;
  double rho = 1.0;
  std::uint64_t seed = 0;
};

/// Seeded random l1-LS instance.
///
/// Draw order from a single GaussianSource(seed): the m*n entries of A in
/// row-major order (scaled by entry_std), then the support of x0 by a
/// partial Fisher-Yates shuffle of 0..n-1, then the nonzeros of x0 in
/// support order. b = A x0.
L1LSInstance generate_instance(const InstanceSpec& spec);

}  // namespace ifbs
