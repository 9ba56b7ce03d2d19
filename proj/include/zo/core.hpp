// SPDX-License-Identifier: Apache-2.0
//
// Core types shared by every optimizer: parameter vectors, seeded random
// directions, minibatch selectors and black-box objectives with query
// accounting.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "zo/errors.hpp"

namespace zo {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using ParamVector = Vector<double>;

/// Throws InvalidDimension / DomainError unless `x` is a valid parameter
/// vector (dim >= 1, all entries finite).
template <typename Derived>
void validate_param_vector(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() < 1) throw InvalidDimension("parameter vector must have dim >= 1");
  if (!x.allFinite()) throw DomainError("parameter vector has non-finite entries");
}

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer. Stable across versions; traces depend on it.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the perturbation drawn at step `step_index` of run `run_seed`.
constexpr std::uint64_t step_seed(std::uint64_t run_seed, std::uint64_t step_index) {
  return splitmix64(run_seed ^ splitmix64(step_index));
}

// ---------------------------------------------------------------------------
// Perturbations
// ---------------------------------------------------------------------------

enum class Distribution { Rademacher, Normal, Uniform };

std::string_view to_string(Distribution d);
Distribution distribution_from_string(std::string_view name);

/// A random direction identified by its seed. Never stored materialized in
/// traces; `materialize()` regenerates the identical vector on demand.
struct Perturbation {
  Distribution distribution = Distribution::Rademacher;
  std::uint64_t seed = 0;
  Eigen::Index dim = 1;
  bool normalized = false;

  ParamVector materialize() const;
};

/// Deterministic draw for `seed`. Rademacher entries are +-1, Normal entries
/// standard normal, Uniform entries uniform on [-sqrt(3), sqrt(3)] (unit
/// variance). `normalized` rescales to unit Euclidean norm.
template <typename Scalar = double>
Vector<Scalar> sample_perturbation(Distribution distribution, std::uint64_t seed,
                                   Eigen::Index dim, bool normalized) {
  if (dim < 1) throw InvalidDimension("perturbation dim must be >= 1");
  std::mt19937_64 engine(seed);
  Vector<Scalar> s(dim);
  switch (distribution) {
    case Distribution::Rademacher: {
      std::uint64_t bits = 0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i % 64 == 0) bits = engine();
        s[i] = (bits & 1U) ? Scalar(1) : Scalar(-1);
        bits >>= 1U;
      }
      break;
    }
    case Distribution::Normal: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < dim; ++i) s[i] = Scalar(normal(engine));
      break;
    }
    case Distribution::Uniform: {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> uniform(-half_width, half_width);
      for (Eigen::Index i = 0; i < dim; ++i) s[i] = Scalar(uniform(engine));
      break;
    }
  }
  if (normalized) {
    const Scalar norm = s.norm();
    if (norm > Scalar(0)) s /= norm;
  }
  return s;
}

inline ParamVector Perturbation::materialize() const {
  return sample_perturbation<double>(distribution, seed, dim, normalized);
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// Identifies the minibatch used by one optimizer step. Both symmetric
/// evaluations of a step share the same selector.
struct BatchSelector {
  std::uint64_t epoch_seed = 0;
  std::uint64_t step_index = 0;
  std::uint64_t batch_size = 1;

  friend bool operator==(const BatchSelector&, const BatchSelector&) = default;
};

/// Known smoothness constants of an objective, where derivable.
struct SmoothnessConstants {
  std::optional<double> L;
  std::optional<double> L0;
  std::optional<double> L1;
};

/// Black-box loss f(x; batch). Implementations are immutable after
/// construction and may be shared between concurrent runs. Query accounting
/// lives in CountedObjective, one per run.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index dim() const = 0;

  /// Deterministic in (x, batch). Objectives without data ignore `batch`;
  /// an empty batch means the full dataset.
  virtual double value(const Eigen::Ref<const ParamVector>& x,
                       const std::optional<BatchSelector>& batch) const = 0;

  /// Verification-only gradient. Optimizers never call this for updates.
  virtual bool has_gradient() const { return false; }
  virtual ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const;

  virtual SmoothnessConstants smoothness() const { return {}; }

  /// f*, when known in closed form or by a verification solve.
  virtual std::optional<double> minimum_value() const { return std::nullopt; }

  /// True when value() depends on the batch selector.
  virtual bool stochastic() const { return false; }

  /// Starting point for runs; `scale` stretches its offset from the
  /// objective's reference point.
  virtual ParamVector initial_point(std::uint64_t seed, double scale) const = 0;
};

/// Per-run query counter around a shared Objective.
class CountedObjective {
 public:
  explicit CountedObjective(const Objective& objective) : objective_(&objective) {}
  CountedObjective(const CountedObjective&) = delete;
  CountedObjective& operator=(const CountedObjective&) = delete;

  double operator()(const Eigen::Ref<const ParamVector>& x,
                    const std::optional<BatchSelector>& batch = std::nullopt) {
    queries_.fetch_add(1, std::memory_order_relaxed);
    return objective_->value(x, batch);
  }

  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  const Objective& objective() const { return *objective_; }
  Eigen::Index dim() const { return objective_->dim(); }

 private:
  const Objective* objective_;
  std::atomic<std::uint64_t> queries_{0};
};

/// Both losses of a symmetric probe and the central-difference estimate
/// gamma = (f(x + rho s) - f(x - rho s)) / (2 rho).
struct SymmetricProbe {
  double f_plus = 0.0;
  double f_minus = 0.0;
  double gamma = 0.0;
};

/// Spends exactly two queries. Throws InvalidSmoothingParameter for
/// rho <= 0, InvalidDimension on size mismatch and NonFiniteLoss (carrying
/// the offending point) when either loss is not finite.
SymmetricProbe central_difference(CountedObjective& objective,
                                  const Eigen::Ref<const ParamVector>& x,
                                  const Eigen::Ref<const ParamVector>& s, double rho,
                                  const std::optional<BatchSelector>& batch);

inline double central_difference_gamma(CountedObjective& objective,
                                       const Eigen::Ref<const ParamVector>& x,
                                       const Eigen::Ref<const ParamVector>& s, double rho,
                                       const std::optional<BatchSelector>& batch) {
  return central_difference(objective, x, s, rho, batch).gamma;
}

/// Evaluates once and throws NonFiniteLoss if the value is not finite.
double evaluate_finite(CountedObjective& objective, const Eigen::Ref<const ParamVector>& x,
                       const std::optional<BatchSelector>& batch);

}  // namespace zo
