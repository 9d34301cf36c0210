#pragma once

#include "ifbs/types.hpp"

namespace ifbs {

// +1 for c >= 0, -1 otherwise.
inline int sign_of(double c) { return c >= 0.0 ? 1 : -1; }

// [|v| - nu]_+ sgn(v).
double soft_threshold(double v, double nu);

// Componentwise soft threshold: the prox of nu ||.||_1.
Vector prox_l1(const Vector& z, double nu);

/// Orthant {x_E : sign_i * x_i >= 0} over an index set E. Each entry of
/// `sign` is +1 or -1 and pairs with the same position in `support`.
struct SignPattern {
  IndexSet support;
  std::vector<int> sign;

  Index size() const { return static_cast<Index>(sign.size()); }
};

// Sign pattern -sgn(h*_i) on E.
SignPattern orthant_from_gradient(const Vector& h_star, const IndexSet& e);

// Euclidean projection onto the orthant described by s (x_E indexed like s).
Vector project_orthant(const Vector& x_e, const SignPattern& s);

/// Checks z - p in nu * d||.||_1(p) componentwise to tolerance tol.
bool check_prox_optimality(const Vector& z, const Vector& p, double nu, double tol);

}  // namespace ifbs
