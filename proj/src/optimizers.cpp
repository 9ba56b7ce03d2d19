// SPDX-License-Identifier: Apache-2.0
#include "zo/optimizers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace zo {

namespace {

constexpr std::uint64_t kBatchSeedSalt = 0xba7c4ULL;

bool diverged_value(double f) { return !std::isfinite(f) || std::abs(f) > kDivergenceThreshold; }

bool is_s2p(StepRuleKind kind) {
  return kind == StepRuleKind::S2POption1 || kind == StepRuleKind::S2POption2 ||
         kind == StepRuleKind::S2POption3 || kind == StepRuleKind::S2POption4;
}

void require_kind(bool ok, const char* step) {
  if (!ok) throw ConfigError("kind", std::string("rule kind does not match ") + step);
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

StepRecord begin_record(const OptimizerState& state) {
  StepRecord r;
  r.k = state.k;
  r.step_seed = state.current_step_seed();
  return r;
}

StepOutcome finish(OptimizerState& state, CountedObjective& objective, StepRecord record,
                   bool diverged) {
  record.queries = objective.queries();
  state.trace.steps.push_back(std::move(record));
  if (diverged) {
    state.trace.status = RunStatus::Diverged;
    return StepOutcome::Diverged;
  }
  ++state.k;
  return StepOutcome::Ok;
}

// Evaluates x + t s on the batch; records the loss. Returns false on a
// divergent value.
bool evaluate_into(CountedObjective& objective, const ParamVector& x, const ParamVector& s,
                   double t, const std::optional<BatchSelector>& batch, StepRecord& record,
                   double& out) {
  out = objective(x + t * s, batch);
  record.losses.push_back(out);
  return !diverged_value(out);
}

// Symmetric probe that reports divergence instead of throwing.
bool probe_into(CountedObjective& objective, const ParamVector& x, const ParamVector& s, double rho,
                const std::optional<BatchSelector>& batch, StepRecord& record,
                SymmetricProbe& probe) {
  double f_plus = 0.0;
  double f_minus = 0.0;
  const bool ok_plus = evaluate_into(objective, x, s, rho, batch, record, f_plus);
  const bool ok_minus = evaluate_into(objective, x, s, -rho, batch, record, f_minus);
  probe.f_plus = f_plus;
  probe.f_minus = f_minus;
  probe.gamma = (f_plus - f_minus) / (2.0 * rho);
  return ok_plus && ok_minus;
}

}  // namespace

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string_view to_string(StepRuleKind kind) {
  switch (kind) {
    case StepRuleKind::S2POption1:
      return "s2p-opt1";
    case StepRuleKind::S2POption2:
      return "s2p-opt2";
    case StepRuleKind::S2POption3:
      return "s2p-opt3";
    case StepRuleKind::S2POption4:
      return "s2p-opt4";
    case StepRuleKind::VS2P:
      return "vs2p";
    case StepRuleKind::MeZO:
      return "mezo";
    case StepRuleKind::STPConstant:
      return "stp";
  }
  return "unknown";
}

StepRuleKind step_rule_from_string(std::string_view name) {
  for (auto kind : {StepRuleKind::S2POption1, StepRuleKind::S2POption2, StepRuleKind::S2POption3,
                    StepRuleKind::S2POption4, StepRuleKind::VS2P, StepRuleKind::MeZO,
                    StepRuleKind::STPConstant}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("kind", "unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(Decay decay) { return decay == Decay::Cosine ? "cosine" : "none"; }

Decay decay_from_string(std::string_view name) {
  if (name == "none") return Decay::None;
  if (name == "cosine") return Decay::Cosine;
  throw ConfigError("decay", "unknown decay '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::S2P:
      return "s2p";
    case Algorithm::VS2P:
      return "vs2p";
    case Algorithm::MeZO:
      return "mezo";
    case Algorithm::STP:
      return "stp";
  }
  return "unknown";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::TargetReached:
      return "target_reached";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "unknown";
}

RunStatus run_status_from_string(std::string_view name) {
  if (name == "completed") return RunStatus::Completed;
  if (name == "target_reached") return RunStatus::TargetReached;
  if (name == "diverged") return RunStatus::Diverged;
  throw ConfigError("status", "unknown run status '" + std::string(name) + "'");
}

Algorithm algorithm_of(StepRuleKind kind) {
  if (is_s2p(kind)) return Algorithm::S2P;
  switch (kind) {
    case StepRuleKind::VS2P:
      return Algorithm::VS2P;
    case StepRuleKind::MeZO:
      return Algorithm::MeZO;
    default:
      return Algorithm::STP;
  }
}

int query_cost(StepRuleKind kind) {
  switch (kind) {
    case StepRuleKind::S2POption2:
    case StepRuleKind::S2POption4:
      return 4;
    case StepRuleKind::STPConstant:
      return 3;
    default:
      return 2;
  }
}

// ---------------------------------------------------------------------------
// Step sizes
// ---------------------------------------------------------------------------

void StepSizeRule::validate() const {
  require(rho > 0.0, "rho", "must be > 0");
  if (K) require(*K >= 1, "K", "must be >= 1");
  if (decay == Decay::Cosine) require(K.has_value(), "K", "required by cosine decay");
  switch (kind) {
    case StepRuleKind::S2POption1:
      require(alpha0.has_value(), "alpha0", "required by s2p-opt1");
      require(*alpha0 >= 0.0, "alpha0", "must be >= 0");
      require(K.has_value(), "K", "required by s2p-opt1");
      break;
    case StepRuleKind::S2POption2:
      require(L.has_value(), "L", "required by s2p-opt2");
      require(*L > 0.0, "L", "must be > 0");
      break;
    case StepRuleKind::S2POption3:
      require(L1.has_value(), "L1", "required by s2p-opt3");
      require(*L1 > 0.0, "L1", "must be > 0 for s2p-opt3");
      require(B > 0.0, "B", "must be > 0");
      require(K.has_value(), "K", "required by s2p-opt3");
      break;
    case StepRuleKind::S2POption4:
      require(L0.has_value(), "L0", "required by s2p-opt4");
      require(L1.has_value(), "L1", "required by s2p-opt4");
      require(*L0 > 0.0, "L0", "must be > 0");
      require(*L1 >= 0.0, "L1", "must be >= 0");
      require(A > 0.0, "A", "must be > 0");
      require(B > 0.0, "B", "must be > 0");
      break;
    case StepRuleKind::VS2P:
      require(eta.has_value(), "eta", "required by vs2p");
      require(*eta > 0.0, "eta", "must be > 0");
      require(tau_a > 0.0, "tau_a", "must be > 0");
      require(tau_b > 0.0, "tau_b", "must be > 0");
      require(gamma_window >= 1, "gamma_window", "must be >= 1");
      break;
    case StepRuleKind::MeZO:
      require(eta.has_value(), "eta", "required by mezo");
      require(*eta >= 0.0, "eta", "must be >= 0");
      break;
    case StepRuleKind::STPConstant:
      require(eta.has_value(), "eta", "required by stp");
      require(*eta >= 0.0, "eta", "must be >= 0");
      break;
  }
}

double StepSizeRule::learning_rate(std::int64_t k) const {
  const double base = eta.value_or(1.0);
  if (decay == Decay::Cosine) return cosine_decay(base, k, *K);
  return base;
}

double cosine_decay(double eta, std::int64_t k, std::int64_t K) {
  if (K <= 0) throw ConfigError("K", "cosine decay needs K >= 1");
  if (k < 0 || k > K) throw DomainError("cosine decay needs 0 <= k <= K");
  if (k == K) return 0.0;
  return eta * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(K)));
}

double s2p_option1_step(double alpha0, std::int64_t K, Eigen::Index d) {
  return alpha0 / std::sqrt(static_cast<double>(K) * static_cast<double>(d));
}

double s2p_option2_step(double abs_gamma, double L, Eigen::Index d) {
  return abs_gamma / (L * static_cast<double>(d));
}

double s2p_option3_step(double B, double L1, std::int64_t K, Eigen::Index d) {
  return std::numbers::sqrt2 /
         (B * L1 * std::sqrt(static_cast<double>(d) * static_cast<double>(K)));
}

double s2p_option4_step(double abs_gamma, double A, double L0, double B, double L1,
                        Eigen::Index d) {
  return abs_gamma / ((A * L0 + std::numbers::sqrt2 * B * L1 * abs_gamma) * static_cast<double>(d));
}

double vs2p_step_magnitude(double decay, double rho, double abs_gamma, double sigma,
                           double tau_a, double tau_b) {
  if (abs_gamma == 0.0) return 0.0;
  return decay * rho / (tau_b * sigma / abs_gamma + tau_b / tau_a);
}

double gamma_history_sigma(const std::deque<double>& history) {
  if (history.empty()) return 0.0;
  if (history.size() < 2) return std::abs(history.back());
  double mean = 0.0;
  for (double g : history) mean += g;
  mean /= static_cast<double>(history.size());
  double ss = 0.0;
  for (double g : history) ss += (g - mean) * (g - mean);
  return std::sqrt(ss / static_cast<double>(history.size() - 1));
}

ParamVector sign_trick_direction(double gamma, const Eigen::Ref<const ParamVector>& s) {
  const double sign = gamma > 0.0 ? 1.0 : (gamma < 0.0 ? -1.0 : 0.0);
  return -(sign * std::abs(gamma)) * s;
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

OptimizerState::OptimizerState(ParamVector x0, std::uint64_t seed, PerturbationSpec spec)
    : x(std::move(x0)), run_seed(seed), perturbation(spec) {
  validate_param_vector(x);
  trace.run_seed = seed;
}

ParamVector OptimizerState::current_direction() const {
  return sample_perturbation<double>(perturbation.distribution, current_step_seed(), x.size(),
                                     perturbation.normalized);
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

StepOutcome s2p_step(OptimizerState& state, CountedObjective& objective, const StepSizeRule& rule,
                     const std::optional<BatchSelector>& batch) {
  require_kind(is_s2p(rule.kind), "s2p_step");
  rule.validate();
  validate_param_vector(state.x);
  const ParamVector s = state.current_direction();
  const Eigen::Index d = s.size();
  StepRecord record = begin_record(state);

  double alpha = 0.0;
  switch (rule.kind) {
    case StepRuleKind::S2POption1:
      alpha = s2p_option1_step(*rule.alpha0, *rule.K, d);
      break;
    case StepRuleKind::S2POption3:
      alpha = s2p_option3_step(rule.B, *rule.L1, *rule.K, d);
      break;
    case StepRuleKind::S2POption2:
    case StepRuleKind::S2POption4: {
      SymmetricProbe probe;
      if (!probe_into(objective, state.x, s, rule.rho, batch, record, probe)) {
        return finish(state, objective, std::move(record), true);
      }
      record.gamma = probe.gamma;
      const double abs_gamma = std::abs(probe.gamma);
      alpha = rule.kind == StepRuleKind::S2POption2
                  ? s2p_option2_step(abs_gamma, *rule.L, d)
                  : s2p_option4_step(abs_gamma, rule.A, *rule.L0, rule.B, *rule.L1, d);
      break;
    }
    default:
      break;
  }
  record.alpha = alpha;

  double f_plus = 0.0;
  double f_minus = 0.0;
  const bool ok_plus = evaluate_into(objective, state.x, s, alpha, batch, record, f_plus);
  const bool ok_minus = evaluate_into(objective, state.x, s, -alpha, batch, record, f_minus);
  if (!ok_plus || !ok_minus) return finish(state, objective, std::move(record), true);

  if (f_plus <= f_minus) {
    state.x += alpha * s;
    record.loss = f_plus;
  } else {
    state.x -= alpha * s;
    record.loss = f_minus;
  }
  return finish(state, objective, std::move(record), false);
}

StepOutcome vs2p_step(OptimizerState& state, CountedObjective& objective,
                      const StepSizeRule& rule, const std::optional<BatchSelector>& batch) {
  require_kind(rule.kind == StepRuleKind::VS2P, "vs2p_step");
  rule.validate();
  validate_param_vector(state.x);
  const ParamVector s = state.current_direction();
  StepRecord record = begin_record(state);

  SymmetricProbe probe;
  if (!probe_into(objective, state.x, s, rule.rho, batch, record, probe)) {
    return finish(state, objective, std::move(record), true);
  }
  const double diff = probe.f_plus - probe.f_minus;
  const double beta = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  const double abs_gamma = std::abs(probe.gamma);

  state.gamma_history.push_back(rule.signed_sigma ? probe.gamma : abs_gamma);
  while (state.gamma_history.size() > rule.gamma_window) state.gamma_history.pop_front();
  const double sigma = gamma_history_sigma(state.gamma_history);

  const double decay = rule.learning_rate(state.k);
  const double alpha =
      beta * vs2p_step_magnitude(decay, rule.rho, abs_gamma, sigma, rule.tau_a, rule.tau_b);
  if (rule.raw_beta_sign) {
    state.x += alpha * s;
  } else {
    state.x -= alpha * s;
  }

  record.gamma = probe.gamma;
  record.beta = beta;
  record.sigma = sigma;
  record.alpha = alpha;
  record.loss = 0.5 * (probe.f_plus + probe.f_minus);
  return finish(state, objective, std::move(record), false);
}

StepOutcome mezo_step(OptimizerState& state, CountedObjective& objective,
                      const StepSizeRule& rule, const std::optional<BatchSelector>& batch) {
  require_kind(rule.kind == StepRuleKind::MeZO, "mezo_step");
  rule.validate();
  validate_param_vector(state.x);
  const ParamVector s = state.current_direction();
  StepRecord record = begin_record(state);

  SymmetricProbe probe;
  if (!probe_into(objective, state.x, s, rule.rho, batch, record, probe)) {
    return finish(state, objective, std::move(record), true);
  }
  const double alpha = rule.learning_rate(state.k);
  state.x -= alpha * probe.gamma * s;
  if (!state.x.allFinite()) {
    state.x += alpha * probe.gamma * s;
    return finish(state, objective, std::move(record), true);
  }

  record.gamma = probe.gamma;
  record.alpha = alpha;
  record.loss = 0.5 * (probe.f_plus + probe.f_minus);
  return finish(state, objective, std::move(record), false);
}

StepOutcome stp_step(OptimizerState& state, CountedObjective& objective,
                     const StepSizeRule& rule, const std::optional<BatchSelector>& batch) {
  require_kind(rule.kind == StepRuleKind::STPConstant, "stp_step");
  rule.validate();
  validate_param_vector(state.x);
  const ParamVector s = state.current_direction();
  StepRecord record = begin_record(state);
  const double alpha = rule.learning_rate(state.k);
  record.alpha = alpha;

  double f_plus = 0.0;
  double f_minus = 0.0;
  double f_here = 0.0;
  const bool ok_plus = evaluate_into(objective, state.x, s, alpha, batch, record, f_plus);
  const bool ok_minus = evaluate_into(objective, state.x, s, -alpha, batch, record, f_minus);
  const bool ok_here = evaluate_into(objective, state.x, s, 0.0, batch, record, f_here);
  if (!ok_plus || !ok_minus || !ok_here) return finish(state, objective, std::move(record), true);

  // Incumbent wins ties against a move; +s wins ties against -s.
  const double best_move = std::min(f_plus, f_minus);
  if (f_here <= best_move) {
    record.loss = f_here;
  } else if (f_plus <= f_minus) {
    state.x += alpha * s;
    record.loss = f_plus;
  } else {
    state.x -= alpha * s;
    record.loss = f_minus;
  }
  return finish(state, objective, std::move(record), false);
}

StepOutcome optimizer_step(OptimizerState& state, CountedObjective& objective,
                           const StepSizeRule& rule, const std::optional<BatchSelector>& batch) {
  switch (algorithm_of(rule.kind)) {
    case Algorithm::S2P:
      return s2p_step(state, objective, rule, batch);
    case Algorithm::VS2P:
      return vs2p_step(state, objective, rule, batch);
    case Algorithm::MeZO:
      return mezo_step(state, objective, rule, batch);
    case Algorithm::STP:
      return stp_step(state, objective, rule, batch);
  }
  throw std::logic_error("unreachable optimizer kind");
}

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

RunTrace run(CountedObjective& objective, const StepSizeRule& rule, const RunOptions& options) {
  rule.validate();
  const Objective& f = objective.objective();
  ParamVector x0 = options.x0 ? *options.x0 : f.initial_point(0, 1.0);
  if (x0.size() != f.dim()) throw InvalidDimension("x0 does not match the objective dimension");
  if (options.batch_size && *options.batch_size < 1) {
    throw ConfigError("batch_size", "must be >= 1");
  }

  OptimizerState state(std::move(x0), options.run_seed, options.perturbation);
  const bool track_gradient = options.epsilon.has_value() && f.has_gradient();
  auto grad_norm = [&](const ParamVector& x) { return f.gradient(x).norm(); };

  state.trace.initial_loss = f.value(state.x, std::nullopt);
  if (f.has_gradient()) state.trace.initial_grad_norm = grad_norm(state.x);
  double current_grad = state.trace.initial_grad_norm;

  const auto cost = static_cast<std::uint64_t>(query_cost(rule.kind));
  const std::uint64_t start = objective.queries();
  const std::uint64_t epoch_seed = splitmix64(options.run_seed ^ kBatchSeedSalt);

  while (true) {
    if (track_gradient && current_grad <= *options.epsilon) {
      state.trace.status = RunStatus::TargetReached;
      break;
    }
    const std::uint64_t used = objective.queries() - start;
    if (used + cost > options.budget) break;
    if (rule.K && state.k >= *rule.K) break;

    std::optional<BatchSelector> batch;
    if (options.batch_size) {
      batch = BatchSelector{epoch_seed, static_cast<std::uint64_t>(state.k), *options.batch_size};
    }
    const std::uint64_t before = objective.queries();
    const StepOutcome outcome = optimizer_step(state, objective, rule, batch);
    if (outcome == StepOutcome::Diverged) break;
    if (objective.queries() - before != cost) {
      throw std::logic_error("step spent " + std::to_string(objective.queries() - before) +
                             " queries, expected " + std::to_string(cost));
    }
    if (track_gradient) {
      current_grad = grad_norm(state.x);
      state.trace.steps.back().grad_norm = current_grad;
    }
  }

  state.trace.queries = objective.queries() - start;
  state.trace.final_x = state.x;
  state.trace.final_loss = f.value(state.x, std::nullopt);
  if (f.has_gradient()) state.trace.final_grad_norm = grad_norm(state.x);
  return std::move(state.trace);
}

RunTrace run(const Objective& objective, const StepSizeRule& rule, const RunOptions& options) {
  CountedObjective counted(objective);
  return run(counted, rule, options);
}

}  // namespace zo
