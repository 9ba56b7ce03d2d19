// SPDX-License-Identifier: Apache-2.0
//
// Stochastic two-point search (four step-size options), its single-probe
// variant with gamma-clipping and the sign trick, and the MeZO/GA and STP
// baselines. Every optimizer is a stepwise state machine writing a RunTrace.
#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zo/core.hpp"

namespace zo {

enum class StepRuleKind { S2POption1, S2POption2, S2POption3, S2POption4, VS2P, MeZO, STPConstant };
enum class Algorithm { S2P, VS2P, MeZO, STP };
enum class Decay { None, Cosine };

std::string_view to_string(StepRuleKind kind);
StepRuleKind step_rule_from_string(std::string_view name);
std::string_view to_string(Decay decay);
Decay decay_from_string(std::string_view name);
std::string_view to_string(Algorithm algorithm);

Algorithm algorithm_of(StepRuleKind kind);

/// Queries spent by one step of `kind`.
int query_cost(StepRuleKind kind);

inline constexpr double kDefaultDescentConstant = 1.01;
inline constexpr double kDefaultTau = 3.0;
inline constexpr double kDefaultRho = 1e-3;
inline constexpr std::size_t kDefaultGammaWindow = 100;
inline constexpr double kDivergenceThreshold = 1e30;

/// Step-size rule and its constants. Only the constants used by `kind` are
/// required; validate() reports the first missing one.
struct StepSizeRule {
  StepRuleKind kind = StepRuleKind::VS2P;
  std::optional<double> alpha0;
  std::optional<double> L;
  std::optional<double> L0;
  std::optional<double> L1;
  double A = kDefaultDescentConstant;
  double B = kDefaultDescentConstant;
  double rho = kDefaultRho;
  std::optional<double> eta;
  double tau_a = kDefaultTau;
  double tau_b = kDefaultTau;
  std::optional<std::int64_t> K;
  Decay decay = Decay::None;
  std::size_t gamma_window = kDefaultGammaWindow;
  /// Standard deviation of signed gamma instead of |gamma|.
  bool signed_sigma = false;
  /// Step along +beta s instead of toward the lower probe.
  bool raw_beta_sign = false;

  /// Throws ConfigError naming the missing or invalid constant.
  void validate() const;

  /// Learning-rate multiplier at step k: eta, or cosine_decay(eta, k, K).
  double learning_rate(std::int64_t k) const;

  friend bool operator==(const StepSizeRule&, const StepSizeRule&) = default;
};

/// eta * (1 + cos(pi k / K)) / 2. Throws ConfigError for K = 0 and
/// DomainError unless 0 <= k <= K.
double cosine_decay(double eta, std::int64_t k, std::int64_t K);

/// Option-specific step sizes, exposed for tests and theory checks.
double s2p_option1_step(double alpha0, std::int64_t K, Eigen::Index d);
double s2p_option2_step(double abs_gamma, double L, Eigen::Index d);
double s2p_option3_step(double B, double L1, std::int64_t K, Eigen::Index d);
double s2p_option4_step(double abs_gamma, double A, double L0, double B, double L1,
                        Eigen::Index d);

/// Magnitude of the VS2P step: decay * rho / (tau_b sigma / |gamma| + tau_b / tau_a),
/// zero when gamma is zero.
double vs2p_step_magnitude(double decay, double rho, double abs_gamma, double sigma,
                           double tau_a, double tau_b);

/// Sample standard deviation, or |newest| while fewer than two entries.
double gamma_history_sigma(const std::deque<double>& history);

enum class RunStatus { Completed, TargetReached, Diverged };
std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view name);

/// One optimizer step. Fields an algorithm does not produce are NaN.
struct StepRecord {
  std::int64_t k = 0;
  std::uint64_t step_seed = 0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// Every loss evaluated in this step, in evaluation order.
  std::vector<double> losses;
  /// Training loss reported for the step: the accepted candidate for S2P
  /// and STP, the mean of the two probes for VS2P and MeZO.
  double loss = std::numeric_limits<double>::quiet_NaN();
  /// Cumulative queries after the step.
  std::uint64_t queries = 0;
  /// Verification-only gradient norm after the step, when an oracle exists.
  double grad_norm = std::numeric_limits<double>::quiet_NaN();

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunTrace {
  std::vector<StepRecord> steps;
  RunStatus status = RunStatus::Completed;
  std::uint64_t run_seed = 0;
  /// Full-batch loss at the start and the end of the run (not counted as
  /// queries).
  double initial_loss = std::numeric_limits<double>::quiet_NaN();
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double initial_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t queries = 0;
  ParamVector final_x;
};

/// How perturbations are drawn.
struct PerturbationSpec {
  Distribution distribution = Distribution::Rademacher;
  bool normalized = false;
};

struct OptimizerState {
  ParamVector x;
  std::int64_t k = 0;
  std::deque<double> gamma_history;
  std::uint64_t run_seed = 0;
  PerturbationSpec perturbation;
  RunTrace trace;

  OptimizerState(ParamVector x0, std::uint64_t seed, PerturbationSpec spec = {});

  /// Direction for the current step, regenerated from the step seed.
  ParamVector current_direction() const;
  std::uint64_t current_step_seed() const { return step_seed(run_seed, static_cast<std::uint64_t>(k)); }
};

enum class StepOutcome { Ok, Diverged };

/// Stochastic two-point step with Option 1-4 step size. Options 2 and 4
/// spend a gamma probe before the two candidates (4 queries); Options 1 and
/// 3 spend 2.
StepOutcome s2p_step(OptimizerState& state, CountedObjective& objective, const StepSizeRule& rule,
                     const std::optional<BatchSelector>& batch);

/// One symmetric probe (2 queries), gamma-clipped step along -beta s.
StepOutcome vs2p_step(OptimizerState& state, CountedObjective& objective,
                      const StepSizeRule& rule, const std::optional<BatchSelector>& batch);

/// x <- x - alpha gamma s (2 queries).
StepOutcome mezo_step(OptimizerState& state, CountedObjective& objective,
                      const StepSizeRule& rule, const std::optional<BatchSelector>& batch);

/// argmin over {x + alpha s, x - alpha s, x}; the incumbent is re-evaluated
/// on the step's batch (3 queries).
StepOutcome stp_step(OptimizerState& state, CountedObjective& objective,
                     const StepSizeRule& rule, const std::optional<BatchSelector>& batch);

/// Dispatches on rule.kind.
StepOutcome optimizer_step(OptimizerState& state, CountedObjective& objective,
                           const StepSizeRule& rule, const std::optional<BatchSelector>& batch);

struct RunOptions {
  std::uint64_t run_seed = 0;
  /// Maximum number of queries.
  std::uint64_t budget = 0;
  /// Stop once the verification gradient norm is <= epsilon.
  std::optional<double> epsilon;
  PerturbationSpec perturbation;
  /// Minibatch size; empty means full batch.
  std::optional<std::uint64_t> batch_size;
  /// Starting point; defaults to objective.initial_point(0, 1).
  std::optional<ParamVector> x0;
};

/// Iterates until the budget is spent, the horizon K (when the rule has
/// one) is reached, the target is met, or the run diverges.
RunTrace run(CountedObjective& objective, const StepSizeRule& rule, const RunOptions& options);
RunTrace run(const Objective& objective, const StepSizeRule& rule, const RunOptions& options);

/// Sign-trick direction -sign(gamma) |gamma| s, which equals -gamma s.
ParamVector sign_trick_direction(double gamma, const Eigen::Ref<const ParamVector>& s);

}  // namespace zo
