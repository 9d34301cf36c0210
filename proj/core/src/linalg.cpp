#include "ifbs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifbs/errors.hpp"
#include "ifbs/rng.hpp"

namespace ifbs::linalg {

namespace {

constexpr std::uint64_t kRestartSeed = 0x5eed'1f'b5ULL;

struct PowerResult {
  double value = 0.0;
  double residual = 0.0;
  bool converged = false;
};

// Power iteration on the symmetric PSD matrix g from unit vector v.
PowerResult power_iterate(const Matrix& g, Vector v, double tol, int max_iter) {
  PowerResult out;
  for (int it = 0; it < max_iter; ++it) {
    const Vector w = g * v;
    const double mu = v.dot(w);
    const double residual = (w - mu * v).norm();
    out.value = mu;
    out.residual = residual;
    const double wn = w.norm();
    if (wn == 0.0) {
      // v lies in the null space; nothing more to learn from this start.
      return out;
    }
    if (residual <= tol * mu) {
      out.converged = true;
      return out;
    }
    v = w / wn;
  }
  return out;
}

// Iterating v -> A^T A v from v0 is iterating u -> A A^T u from A v0, so the
// smaller of the two Gram matrices is formed once and iterated.
PowerResult gram_power_iterate(const Matrix& a, const Matrix& gram, const Vector& v0, double tol,
                               int max_iter) {
  if (gram.rows() == a.cols()) return power_iterate(gram, v0, tol, max_iter);
  Vector u = a * v0;
  const double un = u.norm();
  if (un == 0.0) return {};
  return power_iterate(gram, u / un, tol, max_iter);
}

void check_index_set(const Matrix& a, const IndexSet& s, Index cap) {
  if (s.empty()) throw InvalidArgument("restricted eigenvalue: index set is empty");
  if (static_cast<Index>(s.size()) > cap) {
    throw InvalidArgument("restricted eigenvalue: |S| = " + std::to_string(s.size()) +
                          " exceeds the dense eigensolve cap " + std::to_string(cap));
  }
  for (Index i : s) {
    if (i < 0 || i >= a.cols()) {
      throw InvalidArgument("restricted eigenvalue: index " + std::to_string(i) +
                            " out of range for " + std::to_string(a.cols()) + " columns");
    }
  }
}

Vector restricted_spectrum(const Matrix& a, const IndexSet& s, Index cap) {
  check_index_set(a, s, cap);
  const Matrix as = restrict_columns(a, s);
  const Matrix gram = as.transpose() * as;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("restricted eigenvalue: symmetric eigensolve failed");
  }
  return solver.eigenvalues();  // ascending
}

}  // namespace

Vector matvec(const Matrix& a, const Vector& v) {
  if (a.cols() != v.size()) {
    throw InvalidArgument("matvec: matrix has " + std::to_string(a.cols()) +
                          " columns but vector has length " + std::to_string(v.size()));
  }
  return a * v;
}

Vector rmatvec(const Matrix& a, const Vector& v) {
  if (a.rows() != v.size()) {
    throw InvalidArgument("rmatvec: matrix has " + std::to_string(a.rows()) +
                          " rows but vector has length " + std::to_string(v.size()));
  }
  return a.transpose() * v;
}

double largest_gram_eigenvalue(const Matrix& a, double tol, int max_iter) {
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    throw InvalidArgument("largest_gram_eigenvalue: matrix is zero");
  }
  if (!(tol > 0.0) || max_iter <= 0) {
    throw InvalidArgument("largest_gram_eigenvalue: tol and max_iter must be positive");
  }
  const Index n = a.cols();
  const Matrix gram = a.rows() < n ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  Vector start = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  PowerResult from_ones = gram_power_iterate(a, gram, start, tol, max_iter);

  GaussianSource rng(kRestartSeed);
  Vector random_start(n);
  for (Index i = 0; i < n; ++i) random_start(i) = rng.normal();
  random_start.normalize();
  PowerResult from_random = gram_power_iterate(a, gram, random_start, tol, max_iter);

  // A start orthogonal to the top eigenvector settles on a lower eigenvalue
  // (or zero); the larger converged estimate is the dominant one.
  const PowerResult& best = from_random.value > from_ones.value ? from_random : from_ones;
  if (!best.converged) {
    throw NumericalFailure("largest_gram_eigenvalue: no convergence within max_iter",
                           best.value);
  }
  return best.value;
}

Matrix restrict_columns(const Matrix& a, const IndexSet& s) {
  Matrix out(a.rows(), static_cast<Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) out.col(static_cast<Index>(j)) = a.col(s[j]);
  return out;
}

double smallest_restricted_eigenvalue(const Matrix& a, const IndexSet& s, Index cap) {
  const Vector eig = restricted_spectrum(a, s, cap);
  return std::max(0.0, eig(0));
}

double smallest_nonzero_restricted_eigenvalue(const Matrix& a, const IndexSet& s,
                                              double zero_tol, Index cap) {
  const Vector eig = restricted_spectrum(a, s, cap);
  for (Index i = 0; i < eig.size(); ++i) {
    if (eig(i) > zero_tol) return eig(i);
  }
  return 0.0;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace ifbs::linalg
