// SPDX-License-Identifier: Apache-2.0
//
// Hand-derived reference values.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "zo/theory.hpp"

using namespace zo;
using zo::test::vec;

TEST_CASE("gamma on half squared norm equals x.s") {
  const auto f = test::scaled_sphere(2);
  CountedObjective counted(f);
  // f(1.1, 1.9) = 2.41, f(0.9, 2.1) = 2.61.
  const double gamma = central_difference_gamma(counted, vec({1, 2}), vec({1, -1}), 0.1, {});
  CHECK(gamma == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(counted.queries() == 2);
}

TEST_CASE("gamma on x^4 at 1") {
  const QuarticObjective f(1, 1.0);
  CountedObjective counted(f);
  const double gamma = central_difference_gamma(counted, vec({1}), vec({1}), 1e-3, {});
  CHECK(gamma == doctest::Approx(4.000004).epsilon(1e-10));
}

TEST_CASE("option step sizes") {
  CHECK(s2p_option1_step(1.0, 100, 100) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(s2p_option2_step(1.0, 1.0, 2) == 0.5);
  CHECK(s2p_option4_step(0.0, 1.01, 1.0, 1.01, 1.0, 10) == 0.0);
  // sqrt(2) / (B L1 sqrt(d K)) with B = 1, L1 = 1, d = 2, K = 1.
  CHECK(s2p_option3_step(1.0, 1.0, 1, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("vs2p step magnitude 5e-4") {
  CHECK(vs2p_step_magnitude(1.0, 1e-3, 3.0, 1.0, 3.0, 3.0) == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(vs2p_step_magnitude(1.0, 1e-3, 0.0, 1.0, 3.0, 3.0) == 0.0);
}

TEST_CASE("s2p option 2 hand example") {
  const auto f = test::scaled_sphere(2);
  const std::uint64_t seed = test::seed_for_direction(vec({1, -1}));
  StepSizeRule rule;
  rule.kind = StepRuleKind::S2POption2;
  rule.L = 1.0;
  OptimizerState state(vec({1, 2}), seed);
  CountedObjective counted(f);
  REQUIRE(s2p_step(state, counted, rule, {}) == StepOutcome::Ok);
  // gamma = -1, alpha = 1/2; candidates f(1.5,1.5) = 2.25 and f(0.5,2.5) = 3.25.
  CHECK(state.x[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(state.x[1] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(state.trace.steps[0].loss == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(counted.queries() == 4);
}

TEST_CASE("mezo hand example") {
  const auto f = test::scaled_sphere(2);
  const std::uint64_t seed = test::seed_for_direction(vec({1, -1}));
  StepSizeRule rule;
  rule.kind = StepRuleKind::MeZO;
  rule.eta = 0.1;
  OptimizerState state(vec({1, 2}), seed);
  CountedObjective counted(f);
  REQUIRE(mezo_step(state, counted, rule, {}) == StepOutcome::Ok);
  CHECK(state.x[0] == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(state.x[1] == doctest::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("stp hand example") {
  // f = x^2 in one dimension: candidates 2.25, 0.25, 1.0.
  const auto f = test::scaled_sphere(1, 2.0);
  const std::uint64_t seed = test::seed_for_direction(vec({1}));
  StepSizeRule rule;
  rule.kind = StepRuleKind::STPConstant;
  rule.eta = 0.5;
  OptimizerState state(vec({1}), seed);
  CountedObjective counted(f);
  REQUIRE(stp_step(state, counted, rule, {}) == StepOutcome::Ok);
  CHECK(state.x[0] == 0.5);
  CHECK(state.trace.steps[0].losses == std::vector<double>{2.25, 0.25, 1.0});
  CHECK(counted.queries() == 3);
}

TEST_CASE("cosine decay values") {
  CHECK(cosine_decay(1.0, 0, 100) == 1.0);
  CHECK(cosine_decay(1.0, 100, 100) == 0.0);
  CHECK(cosine_decay(2.0, 50, 100) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("khintchine enumerations") {
  const auto a = khintchine_exact(Eigen::Vector2i(1, 1));
  CHECK(a.expectation == 1.0);
  CHECK(a.lower == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.lower_holds);
  const auto b = khintchine_exact(Eigen::Vector2i(3, 4));
  CHECK(b.expectation == 4.0);
  CHECK(b.lower == doctest::Approx(5.0 / std::numbers::sqrt2).epsilon(1e-15));
  const auto z = khintchine_exact(Eigen::Vector3i::Zero().eval());
  CHECK(z.expectation == 0.0);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
}

TEST_CASE("quartic and exponential derivatives") {
  const QuarticObjective q(1, 1.0);
  CHECK(q.value(vec({2}), {}) == 16.0);
  CHECK(q.gradient(vec({2}))[0] == 32.0);
  CHECK(*q.local_lipschitz(vec({2}), 0.0) == 48.0);
  CHECK(q.value(vec({0}), {}) == 0.0);
  CHECK(q.gradient(vec({0}))[0] == 0.0);

  const ExponentialObjective e(1, 1.0);
  CHECK(e.value(vec({0}), {}) == 1.0);
  CHECK(e.gradient(vec({0}))[0] == 1.0);
  CHECK(*e.local_lipschitz(vec({0}), 0.0) == 1.0);
}

TEST_CASE("descent constants at 0.02") {
  const auto c = descent_constants(0.02);
  CHECK(c.B == doctest::Approx(1.0100670013377905).epsilon(1e-14));
  CHECK(c.A == doctest::Approx(1.0101343386889653).epsilon(1e-14));
  const auto h = descent_constants(0.5);
  CHECK(h.B == doctest::Approx(1.2974425414002563).epsilon(1e-14));
  CHECK(h.A == doctest::Approx(1.3512787292998719).epsilon(1e-14));
}

TEST_CASE("complexity values") {
  SmoothnessProfile p;
  p.L = 1.0;
  p.epsilon = 0.1;
  p.gap = 1.0;
  p.d = 100;
  CHECK(complexity_general(p, 1, 1.0) == 45000.0);
  // 400 / (0.01 - 1e-6) = 40004.0004, rounded up.
  CHECK(complexity_general(p, 2, std::numbers::sqrt2 * 0.1 / 100.0) == 40005.0);

  p.assumption = SmoothnessAssumption::Relaxed;
  p.L0 = 1.0;
  p.L1 = 0.1;
  // (10 + 111.1)^2 = 14665.21.
  CHECK(complexity_relaxed(p, 3, {}).predicted_K == 14666.0);
}

TEST_CASE("learning objectives at zero weights") {
  const auto logreg = make_logreg(200, 5, 3, 200);
  CHECK(logreg.value(ParamVector::Zero(6), {}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto mlp = make_tiny_mlp({4, 6, 3}, Activation::Tanh, 100, 3, 100);
  CHECK(mlp.value(ParamVector::Zero(mlp.dim()), {}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));
}
