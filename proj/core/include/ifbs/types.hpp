#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ifbs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Sorted, duplicate-free, zero-based column indices.
using IndexSet = std::vector<Index>;

}  // namespace ifbs
