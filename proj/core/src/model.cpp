#include "ifbs/model.hpp"

#include <numeric>
#include <string>

#include "ifbs/errors.hpp"
#include "ifbs/linalg.hpp"
#include "ifbs/rng.hpp"

namespace ifbs {

namespace {

void check_length(const char* op, Index expected, Index got) {
  if (expected != got) {
    throw InvalidArgument(std::string(op) + ": expected a vector of length " +
                          std::to_string(expected) + ", got " + std::to_string(got));
  }
}

}  // namespace

LeastSquares::LeastSquares(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() <= 0 || a_.cols() <= 0) throw InvalidArgument("LeastSquares: empty matrix");
  if (a_.rows() != b_.size()) {
    throw InvalidArgument("LeastSquares: A has " + std::to_string(a_.rows()) +
                          " rows but b has length " + std::to_string(b_.size()));
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw InvalidArgument("LeastSquares: non-finite entries in A or b");
  }
  lipschitz_ = linalg::largest_gram_eigenvalue(a_);
}

Vector LeastSquares::residual(const Vector& x) const {
  check_length("residual", a_.cols(), x.size());
  return a_ * x - b_;
}

double LeastSquares::value(const Vector& x) const { return 0.5 * residual(x).squaredNorm(); }

Vector LeastSquares::gradient(const Vector& x) const {
  return a_.transpose() * residual(x);
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothOracle> s, double r)
    : smooth(std::move(s)), rho(r) {
  if (!smooth) throw InvalidArgument("CompositeProblem: missing smooth oracle");
  if (!(rho >= 0.0)) throw InvalidArgument("CompositeProblem: rho must be nonnegative");
}

double objective(const CompositeProblem& p, const Vector& x) {
  check_length("objective", p.dimension(), x.size());
  return p.smooth->value(x) + p.rho * x.lpNorm<1>();
}

Vector gradient_smooth(const CompositeProblem& p, const Vector& x) {
  check_length("gradient_smooth", p.dimension(), x.size());
  return p.smooth->gradient(x);
}

L1LSInstance::L1LSInstance(Matrix a, Vector b, double rho)
    : ls_(std::make_shared<const LeastSquares>(std::move(a), std::move(b))),
      problem_(ls_, rho) {}

L1LSInstance generate_instance(const InstanceSpec& spec) {
  if (spec.m <= 0 || spec.n <= 0) throw InvalidArgument("generate_instance: m and n must be positive");
  if (spec.sparsity < 0 || spec.sparsity > spec.n) {
    throw InvalidArgument("generate_instance: sparsity " + std::to_string(spec.sparsity) +
                          " must lie in [0, n = " + std::to_string(spec.n) + "]");
  }
  if (!(spec.entry_std > 0.0)) throw InvalidArgument("generate_instance: entry_std must be positive");
  if (!(spec.rho >= 0.0)) throw InvalidArgument("generate_instance: rho must be nonnegative");

  GaussianSource rng(spec.seed);
  Matrix a(spec.m, spec.n);
  for (Index i = 0; i < spec.m; ++i) {
    for (Index j = 0; j < spec.n; ++j) a(i, j) = spec.entry_std * rng.normal();
  }

  std::vector<Index> perm(static_cast<std::size_t>(spec.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < spec.sparsity; ++i) {
    const auto remaining = static_cast<std::uint64_t>(spec.n - i);
    const auto j = i + static_cast<Index>(rng.uniform_index(remaining));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Vector x0 = Vector::Zero(spec.n);
  for (Index i = 0; i < spec.sparsity; ++i) x0(perm[static_cast<std::size_t>(i)]) = rng.normal();

  Vector b = a * x0;
  return L1LSInstance(std::move(a), std::move(b), spec.rho);
}

}  // namespace ifbs
