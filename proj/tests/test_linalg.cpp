#include <random>

#include <gtest/gtest.h>

#include "ifbs/errors.hpp"
#include "ifbs/linalg.hpp"
#include "support/oracles.hpp"

namespace ifbs {
namespace {

using linalg::largest_gram_eigenvalue;
using linalg::matvec;
using linalg::smallest_nonzero_restricted_eigenvalue;
using linalg::smallest_restricted_eigenvalue;

TEST(Matvec, IdentityReturnsInput) {
  Vector v(2);
  v << 3, -1;
  EXPECT_EQ(matvec(Matrix::Identity(2, 2), v), v);
}

TEST(Matvec, HandArithmetic) {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  const Vector r = matvec(a, Vector::Ones(2));
  EXPECT_DOUBLE_EQ(r(0), 3.0);
  EXPECT_DOUBLE_EQ(r(1), 1.0);
}

TEST(Matvec, ZeroMatrix) {
  EXPECT_EQ(matvec(Matrix::Zero(2, 3), Vector::Ones(3)), Vector::Zero(2));
}

TEST(Matvec, RejectsDimensionMismatch) {
  EXPECT_THROW(matvec(Matrix::Zero(2, 3), Vector::Ones(2)), InvalidArgument);
}

TEST(Matvec, IsLinear) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = testing::random_matrix(rng, 7, 5);
    const Vector u = testing::random_vector(rng, 5);
    const Vector v = testing::random_vector(rng, 5);
    const double s = std::normal_distribution<double>()(rng);
    const double t = std::normal_distribution<double>()(rng);
    const Vector lhs = matvec(a, s * u + t * v);
    const Vector rhs = s * matvec(a, u) + t * matvec(a, v);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST(LargestGramEigenvalue, Identity) {
  EXPECT_NEAR(largest_gram_eigenvalue(Matrix::Identity(3, 3)), 1.0, 1e-10);
}

TEST(LargestGramEigenvalue, Diagonal) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  EXPECT_NEAR(largest_gram_eigenvalue(a), 4.0, 4e-10);
}

TEST(LargestGramEigenvalue, ZeroMatrixRejected) {
  EXPECT_THROW(largest_gram_eigenvalue(Matrix::Zero(2, 2)), InvalidArgument);
}

TEST(LargestGramEigenvalue, OnesStartInNullSpace) {
  // A^T A = [[1,-1],[-1,1]]; the all-ones start is an eigenvector for 0.
  Matrix a(1, 2);
  a << 1, -1;
  EXPECT_NEAR(largest_gram_eigenvalue(a), 2.0, 2e-10);
}

TEST(LargestGramEigenvalue, OnesStartOrthogonalToTopEigenvector) {
  // Gram = diag-like with top eigenvector (1,-1)/sqrt2 and (1,1)/sqrt2 for a
  // smaller nonzero eigenvalue: the ones start converges to the wrong value.
  Matrix q(2, 2);
  q << 1, 1, 1, -1;
  q /= std::sqrt(2.0);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;  // eigenvalue 1 along (1,1)
  a(1, 1) = 3.0;  // eigenvalue 9 along (1,-1)
  const Matrix rotated = a * q.transpose();
  EXPECT_NEAR(largest_gram_eigenvalue(rotated), 9.0, 9e-10);
}

TEST(LargestGramEigenvalue, NonConvergenceCarriesEstimate) {
  std::mt19937_64 rng(3);
  const Matrix a = testing::random_matrix(rng, 10, 10);
  try {
    largest_gram_eigenvalue(a, 1e-14, 2);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_GT(e.best_estimate(), 0.0);
  }
}

TEST(LargestGramEigenvalue, MatchesFullEigendecomposition) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index rows = 1 + static_cast<Index>(rng() % 20);
    const Index cols = 1 + static_cast<Index>(rng() % 20);
    const Matrix a = testing::random_matrix(rng, rows, cols);
    const double expected = testing::jacobi_eigenvalues(a.transpose() * a).back();
    EXPECT_NEAR(largest_gram_eigenvalue(a), expected, 1e-9 * expected) << rows << "x" << cols;
  }
}

TEST(SmallestRestrictedEigenvalue, OrthonormalColumns) {
  std::mt19937_64 rng(9);
  const Matrix q = testing::random_matrix(rng, 6, 6).householderQr().householderQ();
  EXPECT_NEAR(smallest_restricted_eigenvalue(q, {0, 2, 5}), 1.0, 1e-12);
}

TEST(SmallestRestrictedEigenvalue, Diagonal) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 1;
  EXPECT_NEAR(smallest_restricted_eigenvalue(a, {0, 1}), 1.0, 1e-14);
}

TEST(SmallestRestrictedEigenvalue, EmptySetRejected) {
  EXPECT_THROW(smallest_restricted_eigenvalue(Matrix::Identity(2, 2), {}), InvalidArgument);
}

TEST(SmallestRestrictedEigenvalue, CapEnforced) {
  EXPECT_THROW(smallest_restricted_eigenvalue(Matrix::Identity(4, 4), {0, 1, 2}, 2),
               InvalidArgument);
  EXPECT_THROW(smallest_restricted_eigenvalue(Matrix::Identity(4, 4), {7}), InvalidArgument);
}

TEST(SmallestRestrictedEigenvalue, AgreesWithJacobiAndBoundedByLargest) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = testing::random_matrix(rng, 12, 15);
    IndexSet s;
    for (Index j = 0; j < 15; ++j)
      if (rng() % 3 == 0) s.push_back(j);
    if (s.empty()) s.push_back(0);
    const Matrix as = linalg::restrict_columns(a, s);
    const double expected = std::max(0.0, testing::jacobi_eigenvalues(as.transpose() * as).front());
    const double got = smallest_restricted_eigenvalue(a, s);
    EXPECT_NEAR(got, expected, 1e-9 * std::max(1.0, expected));
    EXPECT_LE(got, largest_gram_eigenvalue(a) * (1 + 1e-9));
  }
}

TEST(SmallestNonzeroRestrictedEigenvalue, ZeroColumns) {
  EXPECT_EQ(smallest_nonzero_restricted_eigenvalue(Matrix::Zero(3, 2), {0, 1}, 1e-10), 0.0);
}

TEST(SmallestNonzeroRestrictedEigenvalue, RankOneGram) {
  Matrix a(1, 2);
  a << 1, 1;
  EXPECT_NEAR(smallest_nonzero_restricted_eigenvalue(a, {0, 1}, 1e-10), 2.0, 1e-12);
}

TEST(SmallestNonzeroRestrictedEigenvalue, OrthonormalColumns) {
  EXPECT_NEAR(smallest_nonzero_restricted_eigenvalue(Matrix::Identity(3, 3), {0, 1}, 1e-10), 1.0,
              1e-14);
}

}  // namespace
}  // namespace ifbs
