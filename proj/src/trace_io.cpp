#include "adsgd/trace_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <string_view>

#include "adsgd/errors.hpp"

namespace adsgd {
namespace {

constexpr std::string_view kHeader = "outer_iter,elapsed_s,objective,gap,active_blocks,active_features";

template <typename T>
T parse_field(std::string_view text, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("trace: invalid field '" + std::string(text) + "'", line_no);
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw InvalidArgument("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << r.outer_iter << ',' << format_double(r.elapsed_s) << ',' << format_double(r.objective) << ','
        << format_double(r.gap) << ',' << r.active_blocks << ',' << r.active_features << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  write_trace_csv(out, trace);
  if (!out) throw InvalidArgument("write failed for '" + path.string() + "'");
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("trace: missing header", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ParseError("trace: unexpected header", line_no);

  std::vector<TraceRecord> trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 6> fields;
    std::string_view rest(line);
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::size_t comma = rest.find(',');
      const bool last = k + 1 == fields.size();
      if (last != (comma == std::string_view::npos)) throw ParseError("trace: expected 6 fields", line_no);
      fields[k] = rest.substr(0, comma);
      if (!last) rest.remove_prefix(comma + 1);
    }
    TraceRecord r;
    r.outer_iter = parse_field<Index>(fields[0], line_no);
    r.elapsed_s = parse_field<double>(fields[1], line_no);
    r.objective = parse_field<double>(fields[2], line_no);
    r.gap = parse_field<double>(fields[3], line_no);
    r.active_blocks = parse_field<Index>(fields[4], line_no);
    r.active_features = parse_field<Index>(fields[5], line_no);
    trace.push_back(r);
  }
  return trace;
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return read_trace_csv(in);
}

}  // namespace adsgd
