// SPDX-License-Identifier: Apache-2.0
//
// Test objectives: analytic functions spanning the L-smooth and
// (L0, L1)-smooth regimes, and small synthetic learning tasks.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zo/core.hpp"
#include "zo/dataset.hpp"

namespace zo {

enum class AnalyticFamily { Quadratic, Quartic, Exponential, Rosenbrock };

/// Closed-form objective with an exact gradient oracle.
class AnalyticObjective : public Objective {
 public:
  virtual AnalyticFamily family() const = 0;

  bool has_gradient() const override { return true; }

  /// Certified bound on |D^3 f(y)[u, u, u]| over unit u and all y with
  /// ||y - x||_inf <= radius. Empty when no bound is known.
  virtual std::optional<double> third_order_bound(const Eigen::Ref<const ParamVector>& x,
                                                  double radius) const = 0;

  /// Certified bound on ||Hessian|| over the same box, i.e. a local L.
  virtual std::optional<double> local_lipschitz(const Eigen::Ref<const ParamVector>& x,
                                                double radius) const = 0;
};

/// f(x) = 1/2 x^T Q x + b^T x with symmetric positive definite Q.
class QuadraticObjective final : public AnalyticObjective {
 public:
  /// Diagonal Q given by its eigenvalues.
  QuadraticObjective(ParamVector diagonal, ParamVector b);
  /// Dense symmetric Q.
  QuadraticObjective(Eigen::MatrixXd Q, ParamVector b);

  std::string name() const override { return "quadratic"; }
  AnalyticFamily family() const override { return AnalyticFamily::Quadratic; }
  Eigen::Index dim() const override { return b_.size(); }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  SmoothnessConstants smoothness() const override;
  std::optional<double> minimum_value() const override { return f_star_; }
  ParamVector initial_point(std::uint64_t seed, double scale) const override;
  std::optional<double> third_order_bound(const Eigen::Ref<const ParamVector>&,
                                          double) const override {
    return 0.0;
  }
  std::optional<double> local_lipschitz(const Eigen::Ref<const ParamVector>&,
                                        double) const override {
    return lambda_max_;
  }

  const ParamVector& minimizer() const { return x_star_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  Eigen::MatrixXd hessian() const;

 private:
  void finish_construction();
  ParamVector apply(const Eigen::Ref<const ParamVector>& x) const;

  bool diagonal_;
  ParamVector diag_;
  Eigen::MatrixXd dense_;
  ParamVector b_;
  ParamVector x_star_;
  double f_star_ = 0.0;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// f(x) = scale * sum x_i^4. Not globally L-smooth; (L0, L1) = (12 scale, 3).
class QuarticObjective final : public AnalyticObjective {
 public:
  QuarticObjective(Eigen::Index dim, double scale);

  std::string name() const override { return "quartic"; }
  AnalyticFamily family() const override { return AnalyticFamily::Quartic; }
  Eigen::Index dim() const override { return dim_; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  SmoothnessConstants smoothness() const override;
  std::optional<double> minimum_value() const override { return 0.0; }
  ParamVector initial_point(std::uint64_t seed, double scale) const override;
  std::optional<double> third_order_bound(const Eigen::Ref<const ParamVector>& x,
                                          double radius) const override;
  std::optional<double> local_lipschitz(const Eigen::Ref<const ParamVector>& x,
                                        double radius) const override;

  double scale() const { return scale_; }

 private:
  Eigen::Index dim_;
  double scale_;
};

/// f(x) = sum exp(a x_i). (L0, L1) = (1e-6, a); f* = 0 is not attained.
class ExponentialObjective final : public AnalyticObjective {
 public:
  static constexpr double kL0Floor = 1e-6;

  ExponentialObjective(Eigen::Index dim, double rate);

  std::string name() const override { return "exponential"; }
  AnalyticFamily family() const override { return AnalyticFamily::Exponential; }
  Eigen::Index dim() const override { return dim_; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  SmoothnessConstants smoothness() const override;
  std::optional<double> minimum_value() const override { return 0.0; }
  ParamVector initial_point(std::uint64_t seed, double scale) const override;
  std::optional<double> third_order_bound(const Eigen::Ref<const ParamVector>& x,
                                          double radius) const override;
  std::optional<double> local_lipschitz(const Eigen::Ref<const ParamVector>& x,
                                        double radius) const override;

  double rate() const { return rate_; }

 private:
  Eigen::Index dim_;
  double rate_;
};

/// Chained Rosenbrock. Declares no smoothness constants.
class RosenbrockObjective final : public AnalyticObjective {
 public:
  explicit RosenbrockObjective(Eigen::Index dim);

  std::string name() const override { return "rosenbrock"; }
  AnalyticFamily family() const override { return AnalyticFamily::Rosenbrock; }
  Eigen::Index dim() const override { return dim_; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  std::optional<double> minimum_value() const override { return 0.0; }
  ParamVector initial_point(std::uint64_t seed, double scale) const override;
  std::optional<double> third_order_bound(const Eigen::Ref<const ParamVector>&,
                                          double) const override {
    return std::nullopt;
  }
  std::optional<double> local_lipschitz(const Eigen::Ref<const ParamVector>&,
                                        double) const override {
    return std::nullopt;
  }

 private:
  Eigen::Index dim_;
};

/// Diagonal quadratic with eigenvalues log-spaced in [1, condition_number]
/// and a seeded linear term; L = condition_number.
QuadraticObjective make_quadratic(Eigen::Index dim, double condition_number,
                                  std::uint64_t seed);

/// Quartic (scale multiplies the sum) or Exponential (scale is the rate a).
/// Audits the declared (L0, L1) numerically before returning.
std::unique_ptr<AnalyticObjective> make_relaxed_smooth(AnalyticFamily family, Eigen::Index dim,
                                                       double scale);

// ---------------------------------------------------------------------------
// Learning tasks
// ---------------------------------------------------------------------------

enum class LearningKind { LogisticRegression, TinyMLP };
enum class Activation { Tanh, ReLU };

/// Common minibatch plumbing for dataset-backed objectives.
class LearningObjective : public Objective {
 public:
  LearningObjective(Dataset data, std::uint64_t batch_size);

  virtual LearningKind kind() const = 0;
  bool stochastic() const override { return batch_size_ < n_samples(); }
  bool has_gradient() const override { return true; }

  const Dataset& dataset() const { return data_; }
  std::uint64_t batch_size() const { return batch_size_; }
  std::uint64_t n_samples() const { return static_cast<std::uint64_t>(data_.features.rows()); }

  /// Row indices for `batch`: a seeded permutation per epoch keyed by
  /// (epoch_seed, epoch), sliced in order of step_index. Empty selector or
  /// batch_size >= n means every row.
  std::vector<Eigen::Index> batch_rows(const std::optional<BatchSelector>& batch) const;

 protected:
  Dataset data_;
  std::uint64_t batch_size_;
};

/// Mean binary cross-entropy of a linear model with bias; parameters are
/// the feature weights followed by the bias.
class LogisticRegressionObjective final : public LearningObjective {
 public:
  /// `generator` records the weights that produced the labels, if known.
  LogisticRegressionObjective(Dataset data, std::uint64_t batch_size,
                              ParamVector generator = ParamVector());

  std::string name() const override { return "logreg"; }
  LearningKind kind() const override { return LearningKind::LogisticRegression; }
  Eigen::Index dim() const override { return data_.features.cols() + 1; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  SmoothnessConstants smoothness() const override;
  std::optional<double> minimum_value() const override { return reference_.value; }
  ParamVector initial_point(std::uint64_t seed, double scale) const override;

  /// Full-batch minimizer found by Newton's method on the gradient oracle.
  struct Reference {
    ParamVector x;
    double value = 0.0;
  };
  const Reference& reference() const { return reference_; }

  /// Weights used to generate the labels (bias 0).
  const ParamVector& generator_weights() const { return generator_; }

 private:
  Reference solve_reference() const;

  double lipschitz_ = 0.0;
  ParamVector generator_;
  Reference reference_;
};

/// Fully connected classifier with softmax cross-entropy. Parameters are,
/// layer by layer, the row-major weight matrix (out x in) then the bias.
class TinyMLPObjective final : public LearningObjective {
 public:
  TinyMLPObjective(std::vector<Eigen::Index> widths, Activation activation, Dataset data,
                   std::uint64_t batch_size);

  std::string name() const override { return "mlp"; }
  LearningKind kind() const override { return LearningKind::TinyMLP; }
  Eigen::Index dim() const override { return n_params_; }
  double value(const Eigen::Ref<const ParamVector>& x,
               const std::optional<BatchSelector>& batch) const override;
  ParamVector gradient(const Eigen::Ref<const ParamVector>& x) const override;
  ParamVector initial_point(std::uint64_t seed, double scale) const override;

  const std::vector<Eigen::Index>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  Eigen::Index num_classes() const { return widths_.back(); }

  /// Offset of layer `layer`'s weights and bias inside the parameter vector.
  Eigen::Index weight_offset(std::size_t layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(std::size_t layer) const;

 private:
  std::vector<Eigen::Index> widths_;
  Activation activation_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index n_params_ = 0;
};

inline constexpr Eigen::Index kMaxMlpParams = 10000;

/// Synthetic binary task: standard normal features, labels from a random
/// hyperplane with 5% flips.
LogisticRegressionObjective make_logreg(std::uint64_t n_samples, Eigen::Index n_features,
                                        std::uint64_t seed, std::uint64_t batch_size);

/// Synthetic multi-class task labeled by a random linear teacher with 5%
/// flips. widths = {inputs, hidden..., classes}.
TinyMLPObjective make_tiny_mlp(std::vector<Eigen::Index> widths, Activation activation,
                               std::uint64_t n_samples, std::uint64_t seed,
                               std::uint64_t batch_size);

std::string_view to_string(AnalyticFamily family);
std::string_view to_string(Activation activation);
Activation activation_from_string(std::string_view name);

}  // namespace zo
