// SPDX-License-Identifier: Apache-2.0
//
// Multi-seed execution, summaries, learning-rate sweeps and dimension
// scaling studies. Runs are sequential; seeds and grid points run
// concurrently up to `jobs`, each with private state.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "zo/harness/config.hpp"
#include "zo/harness/trace_io.hpp"
#include "zo/optimizers.hpp"
#include "zo/theory.hpp"

namespace zo::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  /// Lowest of the initial, per-step and final losses.
  double best_loss = 0.0;
  /// Queries spent when the target was reached.
  std::optional<std::uint64_t> queries_to_target;
  RunStatus status = RunStatus::Completed;
  std::uint64_t queries = 0;

  friend bool operator==(const SeedSummary&, const SeedSummary&) = default;
};

/// Cross-seed statistics use the population standard deviation.
struct SummaryStats {
  std::vector<SeedSummary> seeds;
  double mean_final_loss = 0.0;
  double std_final_loss = 0.0;
  double mean_best_loss = 0.0;
  double std_best_loss = 0.0;
  std::size_t completed = 0;
  std::size_t target_reached = 0;
  std::size_t diverged = 0;

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

SeedSummary summarize_trace(const RunTrace& trace);
SummaryStats summarize(const std::vector<RunTrace>& traces);
nlohmann::json to_json(const SummaryStats& summary);
SummaryStats summary_from_json(const nlohmann::json& j);
/// Reads every trace file and recomputes the summary.
SummaryStats summary_from_traces(const std::vector<std::filesystem::path>& paths);

/// Runs `count` tasks on up to `jobs` threads. The first exception is
/// rethrown after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// One RunTrace per seed in config order.
std::vector<RunTrace> run_seeds(const ExperimentConfig& config, int jobs);

RunOptions run_options(const ExperimentConfig& config, const Objective& objective,
                       std::uint64_t seed);
TraceMeta trace_meta(const ExperimentConfig& config, const Objective& objective);

struct RunOutcome {
  SummaryStats summary;
  int exit_code = kExitOk;
};

/// Writes one trace per seed and summary.json under `out_dir`.
RunOutcome cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, int jobs);

struct SweepPoint {
  double value = 0.0;
  SummaryStats summary;
  /// Every seed diverged; never selected as best.
  bool excluded = false;
  bool best = false;
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  std::optional<std::size_t> best;
  int exit_code = kExitOk;
};

/// Runs the config at each grid value (point_<i>/ subdirectories laid out
/// like cmd_run) and writes sweep.csv.
SweepOutcome cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       int jobs);
void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep, const std::string& parameter);

struct ScalingPoint {
  Eigen::Index dim = 0;
  /// Queries-to-target per seed; empty when the seed never reached it.
  std::vector<std::optional<std::uint64_t>> queries;
  /// Median over seeds, censored seeds counting as +infinity.
  std::optional<double> median;
  std::uint64_t budget = 0;
  std::optional<std::int64_t> K;
  std::optional<double> alpha0;
  bool censored() const { return !median.has_value(); }
};

struct ScalingOutcome {
  std::vector<ScalingPoint> points;
  /// Fit over uncensored points with a positive median.
  std::optional<SlopeFit> fit;
  std::vector<Eigen::Index> excluded_dims;
  int exit_code = kExitOk;
};

/// The config specialised to dimension d: objective.dim, budget and, with
/// theory_horizon, alpha0 and K from the complexity bound.
ExperimentConfig config_for_dim(const ExperimentConfig& config, Eigen::Index d);

/// Measures queries-to-epsilon per dimension and fits the log-log slope.
/// Writes scaling.csv and scaling_fit.json under `out_dir`.
ScalingOutcome cmd_scaling(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                           int jobs);
void write_scaling_csv(std::ostream& out, const ScalingOutcome& scaling);

}  // namespace zo::harness
