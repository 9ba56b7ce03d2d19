// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a versioned JSON tree. Unknown keys are errors.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zo/core.hpp"
#include "zo/optimizers.hpp"

namespace zo::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "ZO_BENCH_DEFAULT_SEED";

enum class TraceFormat { Jsonl, Csv };
std::string_view to_string(TraceFormat format);
TraceFormat trace_format_from_string(std::string_view name);

/// Which objective to build. Keys a family does not use are ignored.
struct ObjectiveSpec {
  /// quadratic | quartic | exponential | rosenbrock | logreg | mlp
  std::string family = "quadratic";
  Eigen::Index dim = 10;
  double condition = 1.0;
  /// Quartic multiplier or exponential rate.
  double scale = 1.0;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  std::uint64_t n_samples = 1000;
  /// Logistic-regression feature count (dim = features + 1).
  Eigen::Index features = 20;
  std::vector<Eigen::Index> widths;
  std::string activation = "tanh";

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

struct RunSpec {
  std::uint64_t budget = 10000;
  std::optional<double> epsilon;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  Distribution distribution = Distribution::Rademacher;
  bool normalized = false;
  std::optional<std::uint64_t> batch_size;
  /// Exit non-zero when any run diverges.
  bool fail_on_divergence = true;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  TraceFormat format = TraceFormat::Jsonl;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct SweepSpec {
  /// eta | alpha0
  std::string parameter = "eta";
  std::vector<double> values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ScalingSpec {
  std::vector<Eigen::Index> dims;
  /// Budget grows with d when set.
  std::optional<std::uint64_t> budget_per_dim;
  /// Option 1/3: take alpha0 = sqrt(2 (f(x0) - f*) / L) and K from the
  /// complexity bound at each d.
  bool theory_horizon = false;

  friend bool operator==(const ScalingSpec&, const ScalingSpec&) = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ObjectiveSpec objective;
  StepSizeRule optimizer;
  RunSpec run;
  OutputSpec output;
  std::optional<SweepSpec> sweep;
  std::optional<ScalingSpec> scaling;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};


nlohmann::json to_json(const ExperimentConfig& config);
/// Throws ConfigError for unknown keys, wrong types, or invalid values.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

nlohmann::json rule_to_json(const StepSizeRule& rule);
StepSizeRule rule_from_json(const nlohmann::json& j, const std::string& prefix = "optimizer");

/// Seeds after precedence: flag, then the environment variable, then config.
std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& config_seeds,
                                         const std::optional<std::vector<std::uint64_t>>& flag,
                                         const char* env_value);

/// The configured objective, shared read-only by all runs of a config.
std::shared_ptr<const Objective> build_objective(const ObjectiveSpec& spec);
ParamVector initial_point(const Objective& objective, const ObjectiveSpec& spec);

}  // namespace zo::harness
