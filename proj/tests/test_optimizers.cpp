// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace zo;
using zo::test::vec;

namespace {

StepSizeRule rule_for(StepRuleKind kind) {
  StepSizeRule r;
  r.kind = kind;
  switch (kind) {
    case StepRuleKind::S2POption1:
      r.alpha0 = 0.5;
      r.K = 1000;
      break;
    case StepRuleKind::S2POption2:
      r.L = 10.0;
      break;
    case StepRuleKind::S2POption3:
      r.L1 = 1.0;
      r.K = 1000;
      break;
    case StepRuleKind::S2POption4:
      r.L0 = 10.0;
      r.L1 = 0.1;
      break;
    case StepRuleKind::VS2P:
      r.eta = 1.0;
      break;
    case StepRuleKind::MeZO:
      r.eta = 0.01;
      break;
    case StepRuleKind::STPConstant:
      r.eta = 0.05;
      break;
  }
  return r;
}

const StepRuleKind kAllKinds[] = {StepRuleKind::S2POption1, StepRuleKind::S2POption2,
                                  StepRuleKind::S2POption3, StepRuleKind::S2POption4,
                                  StepRuleKind::VS2P,       StepRuleKind::MeZO,
                                  StepRuleKind::STPConstant};

}  // namespace

TEST_CASE("names round-trip") {
  for (auto k : kAllKinds) CHECK(step_rule_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(step_rule_from_string("adam"), ConfigError);
  for (auto s : {RunStatus::Completed, RunStatus::TargetReached, RunStatus::Diverged}) {
    CHECK(run_status_from_string(to_string(s)) == s);
  }
}

TEST_CASE("rule defaults and validation") {
  StepSizeRule r;
  CHECK(r.A == 1.01);
  CHECK(r.B == 1.01);
  CHECK(r.tau_a == 3.0);
  CHECK(r.tau_b == 3.0);
  CHECK(r.rho == 1e-3);
  CHECK(r.gamma_window == 100);

  r.kind = StepRuleKind::S2POption2;
  try {
    r.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "L");
  }
  r.kind = StepRuleKind::S2POption1;
  r.alpha0 = 1.0;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  r.K = 10;
  CHECK_NOTHROW(r.validate());
  r.kind = StepRuleKind::VS2P;
  r.eta = 1.0;
  r.decay = Decay::Cosine;
  r.K.reset();
  CHECK_THROWS_AS(r.validate(), ConfigError);
  CHECK_THROWS_AS(cosine_decay(1.0, 0, 0), ConfigError);
}

TEST_CASE("query cost per step matches the counter") {
  const QuadraticObjective f = make_quadratic(6, 5.0, 1);
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    CountedObjective counted(f);
    OptimizerState state(f.initial_point(0, 1.0), 3);
    const StepSizeRule rule = rule_for(kind);
    for (int k = 0; k < 25; ++k) {
      const auto before = counted.queries();
      REQUIRE(optimizer_step(state, counted, rule, {}) == StepOutcome::Ok);
      CHECK(counted.queries() - before == static_cast<std::uint64_t>(query_cost(kind)));
      CHECK(state.trace.steps.back().queries == counted.queries());
    }
    CHECK(state.k == 25);
  }
}

TEST_CASE("s2p keeps the lower candidate") {
  const QuadraticObjective f = make_quadratic(5, 10.0, 2);
  for (auto kind : {StepRuleKind::S2POption1, StepRuleKind::S2POption2, StepRuleKind::S2POption3,
                    StepRuleKind::S2POption4}) {
    CountedObjective counted(f);
    OptimizerState state(f.initial_point(1, 1.0), 9);
    const StepSizeRule rule = rule_for(kind);
    for (int k = 0; k < 30; ++k) {
      REQUIRE(s2p_step(state, counted, rule, {}) == StepOutcome::Ok);
      const StepRecord& r = state.trace.steps.back();
      const double lo = std::min(r.losses[r.losses.size() - 2], r.losses.back());
      CHECK(r.loss == lo);
      CHECK(f.value(state.x, {}) == lo);
    }
  }
}

TEST_CASE("option 4 with zero gamma keeps x") {
  const auto f = test::scaled_sphere(2);
  StepSizeRule rule = rule_for(StepRuleKind::S2POption4);
  OptimizerState state(ParamVector::Zero(2), 4);
  CountedObjective counted(f);
  REQUIRE(s2p_step(state, counted, rule, {}) == StepOutcome::Ok);
  CHECK(state.trace.steps[0].gamma == 0.0);
  CHECK(state.trace.steps[0].alpha == 0.0);
  CHECK(state.x == ParamVector::Zero(2));
}

TEST_CASE("option 4 step is a smooth clip") {
  const double A = 1.01, B = 1.01, L0 = 2.0, L1 = 0.5;
  const Eigen::Index d = 10;
  const double cap = 1.0 / (std::sqrt(2.0) * B * L1 * d);
  double prev = 0.0;
  double prev_slope = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 400; ++i) {
    const double g = 0.05 * i;
    const double a = s2p_option4_step(g, A, L0, B, L1, d);
    CHECK(a > prev);
    CHECK(a < cap);
    const double slope = (a - prev) / 0.05;
    CHECK(slope <= prev_slope * (1 + 1e-12));
    prev = a;
    prev_slope = slope;
  }
}

TEST_CASE("vs2p step shape") {
  const double rho = 1e-3;
  CHECK(vs2p_step_magnitude(1.0, rho, 1e12, 1.0, 3.0, 3.0) == doctest::Approx(rho).epsilon(1e-9));
  for (double g : {0.1, 1.0, 10.0}) {
    CHECK(vs2p_step_magnitude(1.0, rho, g, 1.0, 3.0, 3.0) <
          vs2p_step_magnitude(1.0, rho, g * 1.1, 1.0, 3.0, 3.0));
    CHECK(vs2p_step_magnitude(1.0, rho, 1.0, g, 3.0, 3.0) >
          vs2p_step_magnitude(1.0, rho, 1.0, g * 1.1, 3.0, 3.0));
  }
}

TEST_CASE("gamma history sigma") {
  std::deque<double> h{2.5};
  CHECK(gamma_history_sigma(h) == 2.5);
  h = {1.0, 3.0};
  CHECK(gamma_history_sigma(h) == doctest::Approx(std::sqrt(2.0)));
  h = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(gamma_history_sigma(h) == doctest::Approx(std::sqrt(32.0 / 7.0)));
}

TEST_CASE("vs2p records and window") {
  const QuadraticObjective f = make_quadratic(8, 4.0, 3);
  StepSizeRule rule = rule_for(StepRuleKind::VS2P);
  rule.gamma_window = 5;
  OptimizerState state(f.initial_point(0, 1.0), 11);
  CountedObjective counted(f);
  for (int k = 0; k < 12; ++k) REQUIRE(vs2p_step(state, counted, rule, {}) == StepOutcome::Ok);
  CHECK(state.gamma_history.size() == 5);
  const StepRecord& first = state.trace.steps[0];
  // Warm-up sigma = |gamma| gives the conservative first step.
  CHECK(first.sigma == std::abs(first.gamma));
  CHECK(std::abs(first.alpha) == doctest::Approx(1e-3 / (3.0 + 1.0)).epsilon(1e-12));
  for (const auto& r : state.trace.steps) {
    CHECK(std::abs(r.alpha) <= 1e-3 * 3.0 / 3.0);
    CHECK(r.beta == (r.gamma > 0 ? 1.0 : -1.0));
    CHECK(r.loss == 0.5 * (r.losses[0] + r.losses[1]));
  }
}

TEST_CASE("vs2p moves toward the lower probe") {
  const auto f = test::scaled_sphere(2);
  const std::uint64_t seed = test::seed_for_direction(vec({1, -1}));
  StepSizeRule rule = rule_for(StepRuleKind::VS2P);
  OptimizerState descent(vec({1, 2}), seed);
  CountedObjective c1(f);
  vs2p_step(descent, c1, rule, {});
  CHECK(f.value(descent.x, {}) < f.value(vec({1, 2}), {}));

  rule.raw_beta_sign = true;
  OptimizerState literal(vec({1, 2}), seed);
  CountedObjective c2(f);
  vs2p_step(literal, c2, rule, {});
  CHECK(f.value(literal.x, {}) > f.value(vec({1, 2}), {}));
}

TEST_CASE("vs2p with zero gamma keeps x") {
  const auto f = test::scaled_sphere(3);
  OptimizerState state(ParamVector::Zero(3), 1);
  CountedObjective counted(f);
  REQUIRE(vs2p_step(state, counted, rule_for(StepRuleKind::VS2P), {}) == StepOutcome::Ok);
  CHECK(state.trace.steps[0].alpha == 0.0);
  CHECK(state.x == ParamVector::Zero(3));
}

TEST_CASE("mezo and stp leave x alone with zero signal or step") {
  const auto f = test::scaled_sphere(3);
  OptimizerState a(ParamVector::Zero(3), 1);
  CountedObjective c1(f);
  mezo_step(a, c1, rule_for(StepRuleKind::MeZO), {});
  CHECK(a.x == ParamVector::Zero(3));

  StepSizeRule zero = rule_for(StepRuleKind::STPConstant);
  zero.eta = 0.0;
  OptimizerState b(vec({1, 2, 3}), 1);
  CountedObjective c2(f);
  stp_step(b, c2, zero, {});
  CHECK(b.x == vec({1, 2, 3}));
}

TEST_CASE("stp is monotone on deterministic objectives") {
  const RosenbrockObjective f(4);
  const RunTrace t = run(f, rule_for(StepRuleKind::STPConstant),
                         {.run_seed = 5, .budget = 3000, .x0 = f.initial_point(0, 1.0)});
  double prev = t.initial_loss;
  for (const auto& r : t.steps) {
    CHECK(r.loss <= prev);
    prev = r.loss;
  }
}

TEST_CASE("sign trick equals the mezo direction") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 1000; ++t) {
    const ParamVector s = sample_perturbation<double>(Distribution::Normal, rng(), 7, false);
    const double gamma = normal(rng) * std::pow(10.0, normal(rng));
    CHECK(sign_trick_direction(gamma, s) == (-gamma * s).eval());
  }
}

TEST_CASE("run loop") {
  const auto f = test::scaled_sphere(10);
  StepSizeRule opt1 = rule_for(StepRuleKind::S2POption1);
  opt1.alpha0 = 1.0;
  opt1.K = 5000;
  const RunTrace reached =
      run(f, opt1, {.run_seed = 1, .budget = 10000, .epsilon = 0.1, .x0 = ParamVector::Ones(10)});
  CHECK(reached.status == RunStatus::TargetReached);
  CHECK(reached.final_grad_norm <= 0.1);

  const RunTrace empty = run(f, opt1, {.run_seed = 1, .budget = 0, .x0 = ParamVector::Ones(10)});
  CHECK(empty.status == RunStatus::Completed);
  CHECK(empty.steps.empty());
  CHECK(empty.queries == 0);

  const RunTrace horizon = run(f, opt1, {.run_seed = 1, .budget = 1'000'000, .x0 = ParamVector::Ones(10)});
  CHECK(horizon.steps.size() == 5000);
}

TEST_CASE("mezo diverges with a huge step on x^4") {
  const QuarticObjective f(1, 1.0);
  StepSizeRule rule = rule_for(StepRuleKind::MeZO);
  rule.eta = 1e3;
  const RunTrace t = run(f, rule, {.run_seed = 0, .budget = 1000, .x0 = vec({2})});
  CHECK(t.status == RunStatus::Diverged);
  CHECK(std::isfinite(t.final_loss));
}

TEST_CASE("runs replay bit-identically") {
  const auto task = make_logreg(200, 5, 4, 200);
  for (auto kind : kAllKinds) {
    StepSizeRule rule = rule_for(kind);
    rule.L = rule.L ? rule.L : std::optional<double>(1.0);
    RunOptions opts{.run_seed = 42, .budget = 400, .batch_size = 32};
    const RunTrace a = run(task, rule, opts);
    const RunTrace b = run(task, rule, opts);
    CHECK(test::same_trace(a, b));
  }
}

TEST_CASE("minibatch selector follows the step index") {
  const auto task = make_logreg(500, 3, 8, 500);
  StepSizeRule rule = rule_for(StepRuleKind::MeZO);
  const RunTrace t = run(task, rule, {.run_seed = 3, .budget = 40, .batch_size = 25});
  const ParamVector x0 = task.initial_point(0, 1.0);
  const ParamVector s = sample_perturbation<double>(Distribution::Rademacher, step_seed(3, 0), 4, false);
  const std::uint64_t epoch_seed = splitmix64(3 ^ 0xba7c4ULL);
  const BatchSelector batch{epoch_seed, 0, 25};
  CHECK(t.steps[0].losses[0] == task.value(x0 + rule.rho * s, batch));
}

TEST_CASE("tiny mlp is trainable by vs2p") {
  // 6 inputs, 7 hidden, 2 classes: 65 parameters.
  const auto mlp = make_tiny_mlp({6, 7, 2}, Activation::Tanh, 300, 5, 300);
  const ParamVector x0 = mlp.initial_point(0, 1.0);
  // Cross-entropy is non-negative, so f0 bounds the optimality gap.
  const double f0 = mlp.value(x0, std::nullopt);

  StepSizeRule rule;
  rule.kind = StepRuleKind::VS2P;
  rule.eta = 1.0;
  rule.K = 50000;
  rule.decay = Decay::Cosine;
  for (std::uint64_t seed : {0, 1, 2}) {
    const RunTrace t = run(mlp, rule, {.run_seed = seed, .budget = 100000, .x0 = x0});
    CAPTURE(seed);
    CHECK(f0 - t.final_loss >= 0.2 * f0);
  }
}
