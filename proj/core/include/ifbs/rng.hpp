#pragma once

#include <cstdint>
#include <random>

namespace ifbs {

/// Portable Gaussian source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits of each draw; normals use the
/// Box-Muller transform on pairs of uniforms, returning the cosine branch
/// first and caching the sine branch. Nothing here goes through a standard
/// library distribution, so a given seed produces the same numbers on every
/// conforming toolchain.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform();

  // Uniform integer on [0, bound) by rejection; bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ifbs
