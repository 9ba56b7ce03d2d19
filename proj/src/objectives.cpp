// SPDX-License-Identifier: Apache-2.0
#include "zo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace zo {

namespace {

void require_dim(Eigen::Index dim, Eigen::Index minimum = 1) {
  if (dim < minimum) {
    throw InvalidDimension("objective dim must be >= " + std::to_string(minimum));
  }
}

void require_size(const Eigen::Ref<const ParamVector>& x, Eigen::Index dim) {
  if (x.size() != dim) {
    throw InvalidDimension("expected dim " + std::to_string(dim) + ", got " +
                           std::to_string(x.size()));
  }
}

// Seeded unit direction used to place initial points.
ParamVector unit_direction(std::uint64_t seed, Eigen::Index dim) {
  ParamVector u = sample_perturbation<double>(Distribution::Normal, splitmix64(seed), dim, true);
  return u;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(AnalyticFamily family) {
  switch (family) {
    case AnalyticFamily::Quadratic:
      return "quadratic";
    case AnalyticFamily::Quartic:
      return "quartic";
    case AnalyticFamily::Exponential:
      return "exponential";
    case AnalyticFamily::Rosenbrock:
      return "rosenbrock";
  }
  return "unknown";
}

std::string_view to_string(Activation activation) {
  return activation == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::ReLU;
  throw ConfigError("activation", "unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Quadratic
// ---------------------------------------------------------------------------

QuadraticObjective::QuadraticObjective(ParamVector diagonal, ParamVector b)
    : diagonal_(true), diag_(std::move(diagonal)), b_(std::move(b)) {
  require_dim(b_.size());
  if (diag_.size() != b_.size()) throw InvalidDimension("Q and b must share a dimension");
  if ((diag_.array() <= 0.0).any()) throw DomainError("Q must be positive definite");
  finish_construction();
}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd Q, ParamVector b)
    : diagonal_(false), dense_(std::move(Q)), b_(std::move(b)) {
  require_dim(b_.size());
  if (dense_.rows() != b_.size() || dense_.cols() != b_.size()) {
    throw InvalidDimension("Q must be d x d");
  }
  if (!dense_.isApprox(dense_.transpose())) throw DomainError("Q must be symmetric");
  finish_construction();
}

void QuadraticObjective::finish_construction() {
  if (diagonal_) {
    lambda_min_ = diag_.minCoeff();
    lambda_max_ = diag_.maxCoeff();
    x_star_ = -(b_.array() / diag_.array()).matrix();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_, Eigen::EigenvaluesOnly);
    lambda_min_ = eig.eigenvalues().minCoeff();
    lambda_max_ = eig.eigenvalues().maxCoeff();
    if (lambda_min_ <= 0.0) throw DomainError("Q must be positive definite");
    x_star_ = -dense_.ldlt().solve(b_);
  }
  f_star_ = 0.5 * b_.dot(x_star_);
}

ParamVector QuadraticObjective::apply(const Eigen::Ref<const ParamVector>& x) const {
  if (diagonal_) return (diag_.array() * x.array()).matrix();
  return dense_ * x;
}

double QuadraticObjective::value(const Eigen::Ref<const ParamVector>& x,
                                 const std::optional<BatchSelector>&) const {
  require_size(x, dim());
  return 0.5 * x.dot(apply(x)) + b_.dot(x);
}

ParamVector QuadraticObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim());
  return apply(x) + b_;
}

SmoothnessConstants QuadraticObjective::smoothness() const {
  SmoothnessConstants c;
  c.L = lambda_max_;
  c.L0 = lambda_max_;
  c.L1 = 0.0;
  return c;
}

Eigen::MatrixXd QuadraticObjective::hessian() const {
  if (diagonal_) return diag_.asDiagonal();
  return dense_;
}

ParamVector QuadraticObjective::initial_point(std::uint64_t seed, double scale) const {
  return x_star_ + scale * unit_direction(seed, dim());
}

QuadraticObjective make_quadratic(Eigen::Index dim, double condition_number,
                                  std::uint64_t seed) {
  require_dim(dim);
  if (!(condition_number >= 1.0)) throw DomainError("condition_number must be >= 1");
  ParamVector eigenvalues(dim);
  if (dim == 1) {
    eigenvalues[0] = condition_number;
  } else {
    const double log_cond = std::log(condition_number);
    for (Eigen::Index i = 0; i < dim; ++i) {
      eigenvalues[i] = std::exp(log_cond * static_cast<double>(i) / static_cast<double>(dim - 1));
    }
    eigenvalues[dim - 1] = condition_number;
  }
  std::mt19937_64 engine(splitmix64(seed ^ 0x51ed2701ULL));
  std::normal_distribution<double> normal;
  ParamVector b(dim);
  for (Eigen::Index i = 0; i < dim; ++i) b[i] = normal(engine);
  return QuadraticObjective(std::move(eigenvalues), std::move(b));
}

// ---------------------------------------------------------------------------
// Quartic
// ---------------------------------------------------------------------------

QuarticObjective::QuarticObjective(Eigen::Index dim, double scale) : dim_(dim), scale_(scale) {
  require_dim(dim);
  if (!(scale > 0.0)) throw DomainError("quartic scale must be > 0");
}

double QuarticObjective::value(const Eigen::Ref<const ParamVector>& x,
                               const std::optional<BatchSelector>&) const {
  require_size(x, dim_);
  return scale_ * x.array().square().square().sum();
}

ParamVector QuarticObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim_);
  return (4.0 * scale_ * x.array().cube()).matrix();
}

// 12 s x^2 <= 12 s + 3 * 4 s |x|^3 for every x: the first term covers
// |x| <= 1, the second |x| > 1.
SmoothnessConstants QuarticObjective::smoothness() const {
  SmoothnessConstants c;
  c.L0 = 12.0 * scale_;
  c.L1 = 3.0;
  return c;
}

ParamVector QuarticObjective::initial_point(std::uint64_t seed, double scale) const {
  return scale * sample_perturbation<double>(Distribution::Rademacher, splitmix64(seed), dim_,
                                             false);
}

std::optional<double> QuarticObjective::third_order_bound(const Eigen::Ref<const ParamVector>& x,
                                                          double radius) const {
  return 24.0 * scale_ * (x.cwiseAbs().maxCoeff() + radius);
}

std::optional<double> QuarticObjective::local_lipschitz(const Eigen::Ref<const ParamVector>& x,
                                                        double radius) const {
  const double m = x.cwiseAbs().maxCoeff() + radius;
  return 12.0 * scale_ * m * m;
}

// ---------------------------------------------------------------------------
// Exponential
// ---------------------------------------------------------------------------

ExponentialObjective::ExponentialObjective(Eigen::Index dim, double rate)
    : dim_(dim), rate_(rate) {
  require_dim(dim);
  if (!(rate > 0.0)) throw DomainError("exponential rate must be > 0");
}

double ExponentialObjective::value(const Eigen::Ref<const ParamVector>& x,
                                   const std::optional<BatchSelector>&) const {
  require_size(x, dim_);
  return (rate_ * x.array()).exp().sum();
}

ParamVector ExponentialObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim_);
  return (rate_ * (rate_ * x.array()).exp()).matrix();
}

// ||H|| = a^2 max e^{a x_i} <= a ||grad f||, so L1 = a; L0 is a small floor.
SmoothnessConstants ExponentialObjective::smoothness() const {
  SmoothnessConstants c;
  c.L0 = kL0Floor;
  c.L1 = rate_;
  return c;
}

ParamVector ExponentialObjective::initial_point(std::uint64_t seed, double scale) const {
  return scale * unit_direction(seed, dim_);
}

std::optional<double> ExponentialObjective::third_order_bound(
    const Eigen::Ref<const ParamVector>& x, double radius) const {
  return rate_ * rate_ * rate_ * std::exp(rate_ * (x.maxCoeff() + radius));
}

std::optional<double> ExponentialObjective::local_lipschitz(const Eigen::Ref<const ParamVector>& x,
                                                            double radius) const {
  return rate_ * rate_ * std::exp(rate_ * (x.maxCoeff() + radius));
}

// ---------------------------------------------------------------------------
// Rosenbrock
// ---------------------------------------------------------------------------

RosenbrockObjective::RosenbrockObjective(Eigen::Index dim) : dim_(dim) { require_dim(dim, 2); }

double RosenbrockObjective::value(const Eigen::Ref<const ParamVector>& x,
                                  const std::optional<BatchSelector>&) const {
  require_size(x, dim_);
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

ParamVector RosenbrockObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim_);
  ParamVector g = ParamVector::Zero(dim_);
  for (Eigen::Index i = 0; i + 1 < dim_; ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
    g[i + 1] += 200.0 * a;
  }
  return g;
}

ParamVector RosenbrockObjective::initial_point(std::uint64_t, double scale) const {
  ParamVector x(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) x[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return ParamVector::Ones(dim_) + scale * (x - ParamVector::Ones(dim_));
}

// ---------------------------------------------------------------------------
// Relaxed-smooth factory
// ---------------------------------------------------------------------------

namespace {

// Checks ||H(x)|| <= L0 + L1 ||grad f(x)|| on seeded points spanning several
// magnitudes. Throws if the declared constants fail.
void audit_relaxed_constants(const AnalyticObjective& f) {
  const SmoothnessConstants c = f.smoothness();
  std::mt19937_64 engine(0xa0d17ULL);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const double magnitude = std::pow(10.0, -2.0 + 4.0 * (trial % 20) / 19.0);
    ParamVector x(f.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = magnitude * normal(engine);
    if (f.family() == AnalyticFamily::Exponential) x /= std::max(1.0, magnitude);
    const double hessian_norm = *f.local_lipschitz(x, 0.0);
    const double bound = *c.L0 + *c.L1 * f.gradient(x).norm();
    if (hessian_norm > bound * (1.0 + 1e-12)) {
      throw DomainError("declared (L0, L1) fail the audit for " + f.name());
    }
  }
}

}  // namespace

std::unique_ptr<AnalyticObjective> make_relaxed_smooth(AnalyticFamily family, Eigen::Index dim,
                                                       double scale) {
  std::unique_ptr<AnalyticObjective> f;
  switch (family) {
    case AnalyticFamily::Quartic:
      f = std::make_unique<QuarticObjective>(dim, scale);
      break;
    case AnalyticFamily::Exponential:
      f = std::make_unique<ExponentialObjective>(dim, scale);
      break;
    default:
      throw DomainError("make_relaxed_smooth supports quartic and exponential only");
  }
  audit_relaxed_constants(*f);
  return f;
}

// ---------------------------------------------------------------------------
// Learning objectives
// ---------------------------------------------------------------------------

LearningObjective::LearningObjective(Dataset data, std::uint64_t batch_size)
    : data_(std::move(data)), batch_size_(batch_size) {
  if (data_.features.rows() < 1) throw InvalidDimension("dataset is empty");
  if (data_.labels.size() != data_.features.rows()) {
    throw InvalidDimension("features and labels disagree on sample count");
  }
  if (batch_size_ < 1 || batch_size_ > n_samples()) {
    throw DomainError("batch_size must be in [1, n_samples]");
  }
}

std::vector<Eigen::Index> LearningObjective::batch_rows(
    const std::optional<BatchSelector>& batch) const {
  const std::uint64_t n = n_samples();
  std::vector<Eigen::Index> rows;
  if (!batch || batch->batch_size >= n) {
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    return rows;
  }
  const std::uint64_t bs = batch->batch_size;
  rows.reserve(bs);
  std::vector<Eigen::Index> perm;
  std::uint64_t cached_epoch = ~std::uint64_t{0};
  for (std::uint64_t i = 0; i < bs; ++i) {
    const std::uint64_t global = batch->step_index * bs + i;
    const std::uint64_t epoch = global / n;
    if (epoch != cached_epoch) {
      perm.resize(n);
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::mt19937_64 engine(splitmix64(batch->epoch_seed ^ splitmix64(epoch)));
      std::shuffle(perm.begin(), perm.end(), engine);
      cached_epoch = epoch;
    }
    rows.push_back(perm[global % n]);
  }
  return rows;
}

LogisticRegressionObjective::LogisticRegressionObjective(Dataset data, std::uint64_t batch_size,
                                                         ParamVector generator)
    : LearningObjective(std::move(data), batch_size), generator_(std::move(generator)) {
  if ((data_.labels.array() < 0).any() || (data_.labels.array() > 1).any()) {
    throw DomainError("logistic regression labels must be 0 or 1");
  }
  const Eigen::Index n = data_.features.rows();
  Eigen::MatrixXd augmented(n, dim());
  augmented << data_.features, Eigen::VectorXd::Ones(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(augmented.transpose() * augmented,
                                                     Eigen::EigenvaluesOnly);
  lipschitz_ = eig.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(n));
  if (generator_.size() != dim()) generator_ = ParamVector::Zero(dim());
  reference_ = solve_reference();
}

double LogisticRegressionObjective::value(const Eigen::Ref<const ParamVector>& x,
                                          const std::optional<BatchSelector>& batch) const {
  require_size(x, dim());
  const Eigen::Index p = data_.features.cols();
  const auto w = x.head(p);
  const double bias = x[p];
  const auto rows = batch_rows(batch);
  double total = 0.0;
  for (Eigen::Index r : rows) {
    const double z = data_.features.row(r).dot(w) + bias;
    const double y = data_.labels[r] == 1 ? 1.0 : -1.0;
    total += softplus(-y * z);
  }
  return total / static_cast<double>(rows.size());
}

ParamVector LogisticRegressionObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim());
  const Eigen::Index n = data_.features.rows();
  const Eigen::Index p = data_.features.cols();
  const Eigen::VectorXd z = data_.features * x.head(p) + Eigen::VectorXd::Constant(n, x[p]);
  Eigen::VectorXd weight(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data_.labels[i] == 1 ? 1.0 : -1.0;
    weight[i] = -y * sigmoid(-y * z[i]);
  }
  ParamVector g(dim());
  g.head(p) = data_.features.transpose() * weight / static_cast<double>(n);
  g[p] = weight.sum() / static_cast<double>(n);
  return g;
}

SmoothnessConstants LogisticRegressionObjective::smoothness() const {
  SmoothnessConstants c;
  c.L = lipschitz_;
  c.L0 = lipschitz_;
  c.L1 = 0.0;
  return c;
}

ParamVector LogisticRegressionObjective::initial_point(std::uint64_t, double) const {
  return ParamVector::Zero(dim());
}

LogisticRegressionObjective::Reference LogisticRegressionObjective::solve_reference() const {
  const Eigen::Index n = data_.features.rows();
  Eigen::MatrixXd augmented(n, dim());
  augmented << data_.features, Eigen::VectorXd::Ones(n);

  Reference ref;
  ref.x = ParamVector::Zero(dim());
  ref.value = value(ref.x, std::nullopt);
  for (int iter = 0; iter < 100; ++iter) {
    const ParamVector g = gradient(ref.x);
    if (g.norm() < 1e-12) break;
    const Eigen::VectorXd z = augmented * ref.x;
    Eigen::VectorXd curvature(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = sigmoid(z[i]);
      curvature[i] = s * (1.0 - s);
    }
    Eigen::MatrixXd H = augmented.transpose() * curvature.asDiagonal() * augmented /
                        static_cast<double>(n);
    H.diagonal().array() += 1e-12;
    const ParamVector step = H.ldlt().solve(g);
    double t = 1.0;
    ParamVector candidate = ref.x - step;
    double f = value(candidate, std::nullopt);
    while (f > ref.value && t > 1e-8) {
      t *= 0.5;
      candidate = ref.x - t * step;
      f = value(candidate, std::nullopt);
    }
    if (f > ref.value) break;
    ref.x = candidate;
    ref.value = f;
  }
  return ref;
}

LogisticRegressionObjective make_logreg(std::uint64_t n_samples, Eigen::Index n_features,
                                        std::uint64_t seed, std::uint64_t batch_size) {
  require_dim(n_features);
  if (n_samples < batch_size || batch_size < 1) {
    throw DomainError("need n_samples >= batch_size >= 1");
  }
  std::mt19937_64 engine(splitmix64(seed ^ 0x10915ULL));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  ParamVector w(n_features);
  for (Eigen::Index j = 0; j < n_features; ++j) w[j] = normal(engine);

  Dataset data;
  const auto n = static_cast<Eigen::Index>(n_samples);
  data.features.resize(n, n_features);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n_features; ++j) data.features(i, j) = normal(engine);
    int label = data.features.row(i).dot(w) > 0.0 ? 1 : 0;
    if (uniform(engine) < 0.05) label = 1 - label;
    data.labels[i] = label;
  }
  ParamVector generator = ParamVector::Zero(n_features + 1);
  generator.head(n_features) = w;
  return LogisticRegressionObjective(std::move(data), batch_size, std::move(generator));
}

// ---------------------------------------------------------------------------
// Tiny MLP
// ---------------------------------------------------------------------------

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void activate(Eigen::MatrixXd& z, Activation activation) {
  if (activation == Activation::Tanh) {
    z = z.array().tanh().matrix();
  } else {
    z = z.cwiseMax(0.0);
  }
}

}  // namespace

TinyMLPObjective::TinyMLPObjective(std::vector<Eigen::Index> widths, Activation activation,
                                   Dataset data, std::uint64_t batch_size)
    : LearningObjective(std::move(data), batch_size),
      widths_(std::move(widths)),
      activation_(activation) {
  if (widths_.size() < 2) throw InvalidDimension("MLP needs at least input and output widths");
  for (Eigen::Index w : widths_) require_dim(w);
  if (widths_.back() < 2) throw InvalidDimension("MLP needs at least two classes");
  if (widths_.front() != data_.features.cols()) {
    throw InvalidDimension("MLP input width must match the feature count");
  }
  if ((data_.labels.array() < 0).any() || (data_.labels.array() >= widths_.back()).any()) {
    throw DomainError("MLP labels must lie in [0, classes)");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(n_params_);
    n_params_ += widths_[l + 1] * widths_[l] + widths_[l + 1];
  }
  if (n_params_ > kMaxMlpParams) {
    throw InvalidDimension("MLP has " + std::to_string(n_params_) + " parameters, limit " +
                           std::to_string(kMaxMlpParams));
  }
}

Eigen::Index TinyMLPObjective::bias_offset(std::size_t layer) const {
  return offsets_[layer] + widths_[layer + 1] * widths_[layer];
}

double TinyMLPObjective::value(const Eigen::Ref<const ParamVector>& x,
                               const std::optional<BatchSelector>& batch) const {
  require_size(x, dim());
  const auto rows = batch_rows(batch);
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd h(m, widths_.front());
  for (Eigen::Index i = 0; i < m; ++i) h.row(i) = data_.features.row(rows[static_cast<std::size_t>(i)]);

  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::Map<const RowMajorMatrix> W(x.data() + offsets_[l], widths_[l + 1], widths_[l]);
    const auto b = x.segment(bias_offset(l), widths_[l + 1]);
    Eigen::MatrixXd z = h * W.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < layers) activate(z, activation_);
    h = std::move(z);
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double peak = h.row(i).maxCoeff();
    const double lse = peak + std::log((h.row(i).array() - peak).exp().sum());
    total += lse - h(i, data_.labels[rows[static_cast<std::size_t>(i)]]);
  }
  return total / static_cast<double>(m);
}

ParamVector TinyMLPObjective::gradient(const Eigen::Ref<const ParamVector>& x) const {
  require_size(x, dim());
  const Eigen::Index n = data_.features.rows();
  const std::size_t layers = widths_.size() - 1;

  // Forward pass keeping every layer's input.
  std::vector<Eigen::MatrixXd> inputs;
  inputs.push_back(data_.features);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::Map<const RowMajorMatrix> W(x.data() + offsets_[l], widths_[l + 1], widths_[l]);
    const auto b = x.segment(bias_offset(l), widths_[l + 1]);
    Eigen::MatrixXd z = inputs.back() * W.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < layers) activate(z, activation_);
    inputs.push_back(std::move(z));
  }

  Eigen::MatrixXd delta = inputs.back();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = delta.row(i).maxCoeff();
    Eigen::RowVectorXd p = (delta.row(i).array() - peak).exp().matrix();
    p /= p.sum();
    p[data_.labels[i]] -= 1.0;
    delta.row(i) = p / static_cast<double>(n);
  }

  ParamVector g(dim());
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& input = inputs[l];
    Eigen::Map<RowMajorMatrix> dW(g.data() + offsets_[l], widths_[l + 1], widths_[l]);
    dW = delta.transpose() * input;
    g.segment(bias_offset(l), widths_[l + 1]) = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::Map<const RowMajorMatrix> W(x.data() + offsets_[l], widths_[l + 1], widths_[l]);
    Eigen::MatrixXd back = delta * W;
    if (activation_ == Activation::Tanh) {
      back.array() *= 1.0 - input.array().square();
    } else {
      back.array() *= (input.array() > 0.0).cast<double>();
    }
    delta = std::move(back);
  }
  return g;
}

ParamVector TinyMLPObjective::initial_point(std::uint64_t seed, double scale) const {
  std::mt19937_64 engine(splitmix64(seed ^ 0x31a7ULL));
  std::normal_distribution<double> normal;
  ParamVector x = ParamVector::Zero(dim());
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double stddev = scale / std::sqrt(static_cast<double>(widths_[l]));
    for (Eigen::Index i = 0; i < widths_[l + 1] * widths_[l]; ++i) {
      x[offsets_[l] + i] = stddev * normal(engine);
    }
  }
  return x;
}

TinyMLPObjective make_tiny_mlp(std::vector<Eigen::Index> widths, Activation activation,
                               std::uint64_t n_samples, std::uint64_t seed,
                               std::uint64_t batch_size) {
  if (widths.size() < 2) throw InvalidDimension("MLP needs at least input and output widths");
  const Eigen::Index inputs = widths.front();
  const Eigen::Index classes = widths.back();
  require_dim(inputs);
  if (classes < 2) throw InvalidDimension("MLP needs at least two classes");

  std::mt19937_64 engine(splitmix64(seed ^ 0x3170ULL));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Eigen::MatrixXd teacher(classes, inputs);
  for (Eigen::Index c = 0; c < classes; ++c) {
    for (Eigen::Index j = 0; j < inputs; ++j) teacher(c, j) = normal(engine);
  }

  Dataset data;
  const auto n = static_cast<Eigen::Index>(n_samples);
  data.features.resize(n, inputs);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < inputs; ++j) data.features(i, j) = normal(engine);
    Eigen::Index label = 0;
    (teacher * data.features.row(i).transpose()).maxCoeff(&label);
    if (uniform(engine) < 0.05) {
      std::uniform_int_distribution<Eigen::Index> other(1, classes - 1);
      label = (label + other(engine)) % classes;
    }
    data.labels[i] = static_cast<int>(label);
  }
  return TinyMLPObjective(std::move(widths), activation, std::move(data), batch_size);
}

}  // namespace zo
