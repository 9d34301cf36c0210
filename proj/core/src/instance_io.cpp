#include "ifbs/instance_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "ifbs/errors.hpp"

namespace ifbs {

namespace {

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;

std::vector<double> parse_csv_line(const std::string& line, const std::string& source,
                                   std::size_t line_no) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    if (cell.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidArgument(source + ":" + std::to_string(line_no) + ": not a number: '" +
                            cell + "'");
    }
  }
  return values;
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto values = parse_csv_line(line, path.string(), line_no);
    if (!values.empty()) rows.push_back(std::move(values));
  }
  return rows;
}

}  // namespace

void write_instance(std::ostream& out, const L1LSInstance& inst) {
  out.write(kInstanceMagic, sizeof(kInstanceMagic));
  detail::put_u32(out, kInstanceVersion);
  detail::put_u64(out, static_cast<std::uint64_t>(inst.rows()));
  detail::put_u64(out, static_cast<std::uint64_t>(inst.cols()));
  detail::put_f64(out, inst.rho());
  const Matrix& a = inst.a();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) detail::put_f64(out, a(i, j));
  }
  for (Index i = 0; i < inst.b().size(); ++i) detail::put_f64(out, inst.b()(i));
  if (!out) throw InvalidArgument("write_instance: output stream failed");
}

L1LSInstance read_instance(std::istream& in) {
  char magic[sizeof(kInstanceMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kInstanceMagic, sizeof(magic)) != 0) {
    throw InvalidArgument("read_instance: bad magic, not an instance container");
  }
  const std::uint32_t version = detail::get_u32(in, "version");
  if (version != kInstanceVersion) {
    throw InvalidArgument("read_instance: unsupported version " + std::to_string(version));
  }
  const std::uint64_t m = detail::get_u64(in, "m");
  const std::uint64_t n = detail::get_u64(in, "n");
  if (m == 0 || n == 0 || m > kMaxEntries / n) {
    throw InvalidArgument("read_instance: invalid dimensions");
  }
  const double rho = detail::get_f64(in, "rho");
  Matrix a(static_cast<Index>(m), static_cast<Index>(n));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = detail::get_f64(in, "A");
  }
  Vector b(static_cast<Index>(m));
  for (Index i = 0; i < b.size(); ++i) b(i) = detail::get_f64(in, "b");
  return L1LSInstance(std::move(a), std::move(b), rho);
}

void save_instance(const std::filesystem::path& path, const L1LSInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_instance(out, inst);
}

L1LSInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_instance(in);
}

L1LSInstance load_instance_csv(const std::filesystem::path& a_csv,
                               const std::filesystem::path& b_csv, double rho) {
  const auto a_rows = read_csv(a_csv);
  if (a_rows.empty()) throw InvalidArgument(a_csv.string() + ": no data");
  const std::size_t n = a_rows.front().size();
  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    if (a_rows[i].size() != n) {
      throw InvalidArgument(a_csv.string() + ": row " + std::to_string(i + 1) + " has " +
                            std::to_string(a_rows[i].size()) + " entries, expected " +
                            std::to_string(n));
    }
  }
  std::vector<double> b_values;
  for (const auto& row : read_csv(b_csv)) b_values.insert(b_values.end(), row.begin(), row.end());

  Matrix a(static_cast<Index>(a_rows.size()), static_cast<Index>(n));
  for (std::size_t i = 0; i < a_rows.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Index>(i), static_cast<Index>(j)) = a_rows[i][j];
  }
  Vector b = Eigen::Map<const Vector>(b_values.data(), static_cast<Index>(b_values.size()));
  return L1LSInstance(std::move(a), std::move(b), rho);
}

}  // namespace ifbs
