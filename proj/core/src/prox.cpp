#include "ifbs/prox.hpp"

#include <cmath>
#include <string>

#include "ifbs/errors.hpp"

namespace ifbs {

double soft_threshold(double v, double nu) {
  const double mag = std::abs(v) - nu;
  return mag > 0.0 ? std::copysign(mag, v) : 0.0;
}

Vector prox_l1(const Vector& z, double nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("prox_l1: threshold must be nonnegative");
  return z.unaryExpr([nu](double v) { return soft_threshold(v, nu); });
}

SignPattern orthant_from_gradient(const Vector& h_star, const IndexSet& e) {
  SignPattern s;
  s.support = e;
  s.sign.reserve(e.size());
  for (Index i : e) s.sign.push_back(-sign_of(h_star(i)));
  return s;
}

Vector project_orthant(const Vector& x_e, const SignPattern& s) {
  if (x_e.size() != s.size()) {
    throw InvalidArgument("project_orthant: vector length " + std::to_string(x_e.size()) +
                          " does not match sign pattern length " + std::to_string(s.size()));
  }
  Vector out(x_e.size());
  for (Index i = 0; i < x_e.size(); ++i) {
    out(i) = s.sign[static_cast<std::size_t>(i)] * x_e(i) >= 0.0 ? x_e(i) : 0.0;
  }
  return out;
}

bool check_prox_optimality(const Vector& z, const Vector& p, double nu, double tol) {
  if (z.size() != p.size()) {
    throw InvalidArgument("check_prox_optimality: length mismatch");
  }
  for (Index i = 0; i < z.size(); ++i) {
    if (p(i) != 0.0) {
      if (std::abs(z(i) - p(i) - nu * sign_of(p(i))) > tol) return false;
    } else if (std::abs(z(i)) > nu + tol) {
      return false;
    }
  }
  return true;
}

}  // namespace ifbs
