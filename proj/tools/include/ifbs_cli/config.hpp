#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ifbs/engine.hpp"
#include "ifbs/model.hpp"

namespace ifbs::cli {

// Bad flags, malformed config text, unsatisfiable preconditions. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlgorithmConfig {
  std::string name;
  Algorithm algorithm = Algorithm::IFBS;
  std::string schedule = "fista-bt";
  std::string step = "1/L";
  std::int64_t max_iter = 10000;
  std::optional<double> target_gap;
  std::optional<double> step_tol;
  RestartTest restart_test = RestartTest::InnerProduct;
};

struct ExperimentConfig {
  // Exactly one instance source: a binary container, a CSV pair, or
  // generation parameters (which require a seed).
  std::optional<std::filesystem::path> instance;
  std::optional<std::filesystem::path> a_csv;
  std::optional<std::filesystem::path> b_csv;
  InstanceSpec generate;
  bool has_seed = false;

  double gap_tol = 1e-12;
  std::filesystem::path output = "ifbs-out";  // relative to the config file
  std::optional<std::int64_t> stride;
  double e_threshold = 1e-4;
  std::vector<AlgorithmConfig> algorithms;

  // 1 up to n = 500, 10 above, unless set explicitly.
  std::int64_t effective_stride(Index n) const;
};

/// Parses the flat key-value format:
///
///   # comment
///   key = value
///   [algorithm]
///   name = fista
///   schedule = fista-bt
///
/// Keys before the first [algorithm] header are global. Relative paths
/// are resolved against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ifbs::cli
