#pragma once

#include <cstdint>

#include "ifbs/types.hpp"

namespace ifbs::linalg {

inline constexpr double kDefaultSpectralTol = 1e-10;
inline constexpr int kDefaultPowerIterations = 100000;
inline constexpr Index kDefaultRestrictedCap = 2000;

// A * v with dimension checking.
Vector matvec(const Matrix& a, const Vector& v);

// A^T * v with dimension checking.
Vector rmatvec(const Matrix& a, const Vector& v);

/// Largest eigenvalue of A^T A by power iteration on v -> A^T (A v).
///
/// The iteration starts from the normalized all-ones vector and is
/// cross-checked from a fixed-seed random unit vector, so the result is
/// reproducible and does not silently lock onto a lower eigenvalue when the
/// all-ones start is orthogonal to the top eigenvector. Stops when the
/// eigen-residual ||G v - mu v|| drops below tol * mu, which bounds the
/// relative error of mu by tol.
///
/// Throws InvalidArgument for a zero matrix and NumericalFailure (carrying
/// the best estimate) when max_iter is exhausted.
double largest_gram_eigenvalue(const Matrix& a, double tol = kDefaultSpectralTol,
                               int max_iter = kDefaultPowerIterations);

// lambda_min(A_S^T A_S) by dense symmetric eigensolve, clamped at 0.
double smallest_restricted_eigenvalue(const Matrix& a, const IndexSet& s,
                                      Index cap = kDefaultRestrictedCap);

// Smallest eigenvalue of A_S^T A_S strictly above zero_tol; 0 if none.
double smallest_nonzero_restricted_eigenvalue(const Matrix& a, const IndexSet& s,
                                              double zero_tol,
                                              Index cap = kDefaultRestrictedCap);

// Columns of A selected by S, in order.
Matrix restrict_columns(const Matrix& a, const IndexSet& s);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& a);

}  // namespace ifbs::linalg
