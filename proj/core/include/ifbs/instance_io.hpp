#pragma once

#include <filesystem>
#include <iosfwd>

#include "ifbs/model.hpp"

namespace ifbs {

/// Binary instance container, all fields little-endian:
///
///   bytes 0..7   magic "IFBSINST"
///   uint32       format version (1)
///   uint64       m
///   uint64       n
///   float64      rho
///   float64[m*n] A, row-major
///   float64[m]   b
inline constexpr char kInstanceMagic[8] = {'I', 'F', 'B', 'S', 'I', 'N', 'S', 'T'};
inline constexpr std::uint32_t kInstanceVersion = 1;

void write_instance(std::ostream& out, const L1LSInstance& inst);
L1LSInstance read_instance(std::istream& in);

void save_instance(const std::filesystem::path& path, const L1LSInstance& inst);
L1LSInstance load_instance(const std::filesystem::path& path);

// A.csv: one matrix row per line, comma separated. b.csv: one value per line
// (or a single comma-separated line).
L1LSInstance load_instance_csv(const std::filesystem::path& a_csv,
                               const std::filesystem::path& b_csv, double rho);

}  // namespace ifbs
