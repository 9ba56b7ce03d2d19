// SPDX-License-Identifier: Apache-2.0
//
// Plot-ready tables built from saved traces.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zo/harness/trace_io.hpp"

namespace zo::harness {

/// Mean and population std of the step loss across traces, truncated to
/// the shortest trace.
struct CurveRow {
  std::int64_t step = 0;
  std::uint64_t queries = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct Curve {
  std::string optimizer;
  std::vector<CurveRow> rows;
};

Curve aggregate_curve(const std::vector<LoadedTrace>& traces);

/// STP spends 3 queries per step against 2 for the two-probe methods; the
/// rescaled axis multiplies its queries by 2/3.
double rescaled_queries(const std::string& optimizer, std::uint64_t queries);

void write_curve_csv(std::ostream& out, const Curve& curve, bool rescale_stp);

/// Long-format comparison indexed by cumulative queries.
void write_comparison_csv(std::ostream& out, const std::vector<Curve>& curves, bool rescale_stp);

struct Acceleration {
  std::string optimizer;
  std::optional<std::uint64_t> queries_to_reference;
  /// Baseline queries over VS2P queries; empty when the baseline never
  /// reaches the reference.
  std::optional<double> ratio;
};

/// Reference loss = VS2P's final mean loss.
std::vector<Acceleration> acceleration_ratios(const std::vector<Curve>& curves,
                                              const std::string& reference_optimizer = "vs2p");
void write_acceleration_csv(std::ostream& out, const std::vector<Acceleration>& rows,
                            double reference_loss);

/// Groups traces by optimizer and writes curve_<optimizer>.csv for each
/// group, plus comparison.csv and acceleration.csv when several optimizers
/// are present. Returns the written paths.
std::vector<std::filesystem::path> cmd_report(const std::vector<std::filesystem::path>& traces,
                                              const std::filesystem::path& out_dir,
                                              bool rescale_stp);

}  // namespace zo::harness
