#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "ifbs/engine.hpp"

namespace ifbs {

inline constexpr const char* kTraceCsvHeader =
    "k,obj,gap,step_norm,alpha,lambda,energy,restart,switch";

// %.17g, with "nan"/"inf"/"-inf" for non-finite values.
std::string format_real(double v);

void write_trace_csv(std::ostream& out, const SolverTrace& trace);

// Reads the rows back (support fields are not stored and stay zero).
std::vector<TraceRow> read_trace_csv(std::istream& in);

nlohmann::json trace_summary_json(const SolverTrace& trace, bool include_timings);

/// Snapshot container, little-endian:
///   "IFBSSNAP", uint32 version (1), uint64 n, uint64 stride, uint64 count,
///   then per snapshot: int64 k, float64[n] x, float64[n] y, float64[n] forward.
void write_snapshots(std::ostream& out, const SolverTrace& trace);
void read_snapshots(std::istream& in, SolverTrace& trace);

}  // namespace ifbs
