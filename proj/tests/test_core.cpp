// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"

using namespace zo;
using zo::test::vec;

TEST_CASE("splitmix64 reference output") {
  // First output of the reference SplitMix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  static_assert(step_seed(1, 2) == splitmix64(1 ^ splitmix64(2)));
}

TEST_CASE("rademacher draws") {
  const ParamVector s = sample_perturbation<double>(Distribution::Rademacher, 7, 4, false);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(s[i]) == 1.0);
  CHECK(s.squaredNorm() == 4.0);
  CHECK(s == sample_perturbation<double>(Distribution::Rademacher, 7, 4, false));

  const auto ints = sample_perturbation<int>(Distribution::Rademacher, 11, 1000, false);
  CHECK(ints.cwiseAbs2().sum() == 1000);
}

TEST_CASE("rademacher is balanced") {
  const ParamVector s = sample_perturbation<double>(Distribution::Rademacher, 5, 100000, false);
  CHECK(std::abs(s.mean()) < 0.02);
}

TEST_CASE("normal and uniform moments") {
  const Eigen::Index n = 100000;
  const ParamVector z = sample_perturbation<double>(Distribution::Normal, 3, n, false);
  CHECK(std::abs(z.mean()) < 0.02);
  CHECK(std::abs(z.squaredNorm() / n - 1.0) < 0.03);

  const ParamVector u = sample_perturbation<double>(Distribution::Uniform, 3, n, false);
  CHECK(u.cwiseAbs().maxCoeff() <= std::sqrt(3.0));
  CHECK(std::abs(u.mean()) < 0.02);
  CHECK(std::abs(u.squaredNorm() / n - 1.0) < 0.03);
}

TEST_CASE("normalized draws have unit norm") {
  for (auto dist : {Distribution::Rademacher, Distribution::Normal, Distribution::Uniform}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const ParamVector s = sample_perturbation<double>(dist, seed, 37, true);
      CHECK(std::abs(s.norm() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("perturbation regenerates from its seed") {
  const Perturbation p{Distribution::Normal, 99, 16, false};
  CHECK(p.materialize() == p.materialize());
  CHECK(p.materialize() == sample_perturbation<double>(Distribution::Normal, 99, 16, false));
}

TEST_CASE("zero dimension is rejected") {
  CHECK_THROWS_AS(sample_perturbation<double>(Distribution::Rademacher, 1, 0, false),
                  InvalidDimension);
}

TEST_CASE("distribution names round-trip") {
  for (auto d : {Distribution::Rademacher, Distribution::Normal, Distribution::Uniform}) {
    CHECK(distribution_from_string(to_string(d)) == d);
  }
  CHECK_THROWS(distribution_from_string("cauchy"));
}

TEST_CASE("central difference accounting and errors") {
  const auto f = test::scaled_sphere(3);
  CountedObjective counted(f);
  const ParamVector x = vec({0.5, -1, 2});
  for (int i = 0; i < 7; ++i) {
    const ParamVector s = sample_perturbation<double>(Distribution::Rademacher, i, 3, false);
    central_difference_gamma(counted, x, s, 1e-3, {});
  }
  CHECK(counted.queries() == 14);

  CHECK(central_difference_gamma(counted, x, ParamVector::Zero(3), 1e-3, {}) == 0.0);
  CHECK_THROWS_AS(central_difference_gamma(counted, x, x, 0.0, {}), InvalidSmoothingParameter);
  CHECK_THROWS_AS(central_difference_gamma(counted, x, x, -1.0, {}), InvalidSmoothingParameter);
  CHECK_THROWS_AS(central_difference_gamma(counted, x, vec({1, 1}), 1e-3, {}), InvalidDimension);
}

namespace {

class Blowup final : public Objective {
 public:
  std::string name() const override { return "blowup"; }
  Eigen::Index dim() const override { return 2; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>&) const override {
    return x[0] > 0 ? std::numeric_limits<double>::infinity() : x.squaredNorm();
  }
  ParamVector initial_point(std::uint64_t, double) const override { return ParamVector::Zero(2); }
};

}  // namespace

TEST_CASE("non-finite loss carries the point") {
  Blowup f;
  CountedObjective counted(f);
  try {
    central_difference(counted, vec({0, 0}), vec({1, 1}), 0.5, {});
    FAIL("expected NonFiniteLoss");
  } catch (const NonFiniteLoss& e) {
    CHECK(e.point() == vec({0.5, 0.5}));
    CHECK(std::isinf(e.value()));
  }
}

TEST_CASE("gamma is exact on quadratics") {
  const QuadraticObjective f = make_quadratic(20, 50.0, 4);
  CountedObjective counted(f);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (double rho : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    for (int t = 0; t < 20; ++t) {
      ParamVector x(20);
      for (auto& v : x) v = unit(rng);
      const ParamVector s =
          sample_perturbation<double>(Distribution::Rademacher, rng(), 20, false);
      const ParamVector g = f.gradient(x);
      const double gamma = central_difference_gamma(counted, x, s, rho, {});
      worst = std::max(worst, std::abs(gamma - s.dot(g)) / (s.norm() * g.norm()));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("both probe evaluations share the batch") {
  const auto task = make_logreg(300, 4, 1, 32);
  CountedObjective counted(task);
  const BatchSelector batch{5, 3, 32};
  const ParamVector x = ParamVector::Constant(5, 0.1);
  const ParamVector s = sample_perturbation<double>(Distribution::Rademacher, 2, 5, false);
  const SymmetricProbe p = central_difference(counted, x, s, 1e-3, batch);
  CHECK(p.f_plus == task.value(x + 1e-3 * s, batch));
  CHECK(p.f_minus == task.value(x - 1e-3 * s, batch));
}
