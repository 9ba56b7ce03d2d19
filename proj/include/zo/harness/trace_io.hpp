// SPDX-License-Identifier: Apache-2.0
//
// Trace persistence. JSONL: a header line, one line per step, an end line.
// CSV: `# key=value` metadata comments, a header row, one row per step.
// Floats use the shortest representation that reads back bit-exactly;
// NaN is written as null (JSONL) or an empty cell (CSV).
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "zo/dataset.hpp"
#include "zo/harness/config.hpp"
#include "zo/optimizers.hpp"

namespace zo::harness {

struct TraceMeta {
  std::string optimizer;
  std::string objective;
  Eigen::Index dim = 0;

  friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

struct LoadedTrace {
  TraceMeta meta;
  RunTrace trace;
};

void write_trace_jsonl(std::ostream& out, const RunTrace& trace, const TraceMeta& meta);
void write_trace_csv(std::ostream& out, const RunTrace& trace, const TraceMeta& meta);
void write_trace(const std::filesystem::path& path, const RunTrace& trace, const TraceMeta& meta,
                 TraceFormat format);

/// Throws ParseError carrying the 1-based line number.
LoadedTrace read_trace_jsonl(std::istream& in);
LoadedTrace read_trace_csv(std::istream& in);
/// Format chosen by extension (.csv or anything else as JSONL).
LoadedTrace read_trace(const std::filesystem::path& path);

std::string trace_file_name(std::uint64_t seed, TraceFormat format);

}  // namespace zo::harness
