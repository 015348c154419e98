#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "adsgd/solver.hpp"

namespace adsgd {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Header "outer_iter,elapsed_s,objective,gap,active_blocks,active_features"
/// followed by one row per record.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);

/// Inverse of write_trace_csv; throws ParseError on a bad header or row.
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace adsgd
