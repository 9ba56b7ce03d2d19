// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "zo/core.hpp"
#include "zo/objectives.hpp"
#include "zo/optimizers.hpp"

namespace zo::test {

/// f(x) = c/2 ||x||^2.
inline QuadraticObjective scaled_sphere(Eigen::Index d, double c = 1.0) {
  return QuadraticObjective(ParamVector(ParamVector::Constant(d, c)), ParamVector::Zero(d));
}

inline ParamVector vec(std::initializer_list<double> values) {
  ParamVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// A run seed whose first Rademacher direction equals `target`.
inline std::uint64_t seed_for_direction(const ParamVector& target) {
  for (std::uint64_t seed = 0;; ++seed) {
    const ParamVector s = sample_perturbation<double>(Distribution::Rademacher,
                                                      step_seed(seed, 0), target.size(), false);
    if (s == target) return seed;
  }
}

inline bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline bool same_record(const StepRecord& a, const StepRecord& b) {
  if (a.losses.size() != b.losses.size()) return false;
  for (std::size_t i = 0; i < a.losses.size(); ++i) {
    if (!same_bits(a.losses[i], b.losses[i])) return false;
  }
  return a.k == b.k && a.step_seed == b.step_seed && same_bits(a.gamma, b.gamma) &&
         same_bits(a.beta, b.beta) && same_bits(a.sigma, b.sigma) && same_bits(a.alpha, b.alpha) &&
         same_bits(a.loss, b.loss) && a.queries == b.queries && same_bits(a.grad_norm, b.grad_norm);
}

inline bool same_trace(const RunTrace& a, const RunTrace& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (!same_record(a.steps[i], b.steps[i])) return false;
  }
  return a.status == b.status && a.run_seed == b.run_seed && a.queries == b.queries &&
         same_bits(a.initial_loss, b.initial_loss) && same_bits(a.final_loss, b.final_loss) &&
         same_bits(a.initial_grad_norm, b.initial_grad_norm) &&
         same_bits(a.final_grad_norm, b.final_grad_norm) && a.final_x == b.final_x;
}

inline ParamVector five_point_gradient(const Objective& f, const ParamVector& x, double h) {
  ParamVector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto at = [&](double t) {
      ParamVector y = x;
      y[i] += t;
      return f.value(y, std::nullopt);
    };
    g[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return g;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("zo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace zo::test
