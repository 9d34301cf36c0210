#include "ifbs/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "binary_io.hpp"
#include "ifbs/errors.hpp"

namespace ifbs {

namespace {

constexpr char kSnapshotMagic[8] = {'I', 'F', 'B', 'S', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

double parse_real(const std::string& cell) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(cell, &used);
  if (used != cell.size()) throw std::invalid_argument(cell);
  return v;
}

nlohmann::json optional_real(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.k << ',' << format_real(r.objective) << ',' << format_real(r.gap) << ','
        << format_real(r.step_norm) << ',' << format_real(r.alpha) << ','
        << format_real(r.lambda) << ',' << format_real(r.energy) << ',' << (r.restart ? 1 : 0)
        << ',' << (r.switched ? 1 : 0) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw InvalidArgument("trace CSV: missing or unexpected header");
  }
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) {
      throw InvalidArgument("trace CSV line " + std::to_string(line_no) + ": expected 9 columns");
    }
    try {
      TraceRow r;
      r.k = std::stoll(cells[0]);
      r.objective = parse_real(cells[1]);
      r.gap = parse_real(cells[2]);
      r.step_norm = parse_real(cells[3]);
      r.alpha = parse_real(cells[4]);
      r.lambda = parse_real(cells[5]);
      r.energy = parse_real(cells[6]);
      r.restart = cells[7] == "1";
      r.switched = cells[8] == "1";
      rows.push_back(r);
    } catch (const std::exception&) {
      throw InvalidArgument("trace CSV line " + std::to_string(line_no) + ": malformed value");
    }
  }
  return rows;
}

nlohmann::json trace_summary_json(const SolverTrace& trace, bool include_timings) {
  std::int64_t restarts = 0;
  std::int64_t switches = 0;
  for (const TraceRow& r : trace.rows) {
    restarts += r.restart ? 1 : 0;
    switches += r.switched ? 1 : 0;
  }
  nlohmann::json j;
  j["algorithm"] = algorithm_name(trace.algorithm);
  j["schedule"] = trace.schedule;
  j["termination"] = trace.termination;
  j["iterations"] = trace.iterations;
  j["rows"] = trace.rows.size();
  j["final_objective"] = trace.final_objective;
  j["f_ref"] = optional_real(trace.f_ref);
  j["final_gap"] = trace.f_ref ? nlohmann::json(trace.final_objective - *trace.f_ref)
                               : nlohmann::json(nullptr);
  j["restarts"] = restarts;
  j["switches"] = switches;
  j["snapshot_stride"] = trace.snapshot_stride;
  j["warnings"] = trace.warnings;
  if (include_timings) j["elapsed_seconds"] = trace.elapsed_seconds;
  return j;
}

void write_snapshots(std::ostream& out, const SolverTrace& trace) {
  const std::uint64_t n = trace.snapshots.empty()
                              ? static_cast<std::uint64_t>(trace.final_x.size())
                              : static_cast<std::uint64_t>(trace.snapshots.front().x.size());
  out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  detail::put_u32(out, kSnapshotVersion);
  detail::put_u64(out, n);
  detail::put_u64(out, static_cast<std::uint64_t>(trace.snapshot_stride));
  detail::put_u64(out, trace.snapshots.size());
  for (const Snapshot& s : trace.snapshots) {
    detail::put_u64(out, static_cast<std::uint64_t>(s.k));
    for (const Vector* v : {&s.x, &s.y, &s.forward}) {
      for (Index i = 0; i < v->size(); ++i) detail::put_f64(out, (*v)(i));
    }
  }
  if (!out) throw InvalidArgument("write_snapshots: output stream failed");
}

void read_snapshots(std::istream& in, SolverTrace& trace) {
  char magic[sizeof(kSnapshotMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
    throw InvalidArgument("read_snapshots: bad magic, not a snapshot container");
  }
  if (detail::get_u32(in, "version") != kSnapshotVersion) {
    throw InvalidArgument("read_snapshots: unsupported version");
  }
  const auto n = static_cast<Index>(detail::get_u64(in, "n"));
  trace.snapshot_stride = static_cast<std::int64_t>(detail::get_u64(in, "stride"));
  const std::uint64_t count = detail::get_u64(in, "count");
  trace.snapshots.clear();
  for (std::uint64_t c = 0; c < count; ++c) {
    Snapshot s;
    s.k = static_cast<std::int64_t>(detail::get_u64(in, "k"));
    for (Vector* v : {&s.x, &s.y, &s.forward}) {
      v->resize(n);
      for (Index i = 0; i < n; ++i) (*v)(i) = detail::get_f64(in, "snapshot");
    }
    trace.snapshots.push_back(std::move(s));
  }
  if (!trace.snapshots.empty()) trace.final_x = trace.snapshots.back().x;
}

}  // namespace ifbs
