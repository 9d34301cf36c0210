#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace ifbs {

// Rejected input: dimension mismatches, out-of-range parameters, malformed
// configuration text.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed: non-finite iterates, an iterative method that
// did not reach its tolerance. `best_estimate` carries the last value
// computed when one is meaningful (NaN otherwise).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what,
                            double best_estimate = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace ifbs
