// SPDX-License-Identifier: Apache-2.0
#include "zo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace zo {

namespace {

constexpr double kZ99 = 2.5758293035489004;

double ceil_count(double value) {
  if (!std::isfinite(value)) return value;
  // Shave relative rounding so exact integers are not bumped up by one.
  return std::max(0.0, std::ceil(value * (1.0 - 1e-12)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Khintchine
// ---------------------------------------------------------------------------

KhintchineMC khintchine_mc(const Eigen::Ref<const ParamVector>& g, std::uint64_t n_samples,
                           Distribution distribution, bool normalized, std::uint64_t seed) {
  if (n_samples < 1000) throw PreconditionError("khintchine_mc needs n_samples >= 1000");
  const Eigen::Index d = g.size();
  if (d < 1) throw InvalidDimension("g must have dim >= 1");

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const ParamVector s =
        sample_perturbation<double>(distribution, step_seed(seed, i), d, normalized);
    const double v = std::abs(g.dot(s));
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  KhintchineMC out;
  out.samples = n_samples;
  out.estimate = sum / n;
  const double variance = std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1.0));
  out.half_width = kZ99 * std::sqrt(variance / n);
  const double norm = g.norm();
  const double scale = normalized ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
  out.lower = norm * scale / std::numbers::sqrt2;
  out.upper = norm * scale;
  out.passes = out.lower - out.half_width <= out.estimate &&
               out.estimate <= out.upper + out.half_width;
  return out;
}

// ---------------------------------------------------------------------------
// Delta audit
// ---------------------------------------------------------------------------

DeltaAudit delta_error_audit(const Objective& objective, const Eigen::Ref<const ParamVector>& x,
                             const Eigen::Ref<const ParamVector>& s, double rho,
                             std::optional<double> L_override) {
  if (!objective.has_gradient()) {
    throw UnsupportedObjective(objective.name() + " has no gradient oracle");
  }
  std::optional<double> L = L_override;
  if (!L) L = objective.smoothness().L;
  if (!L) {
    if (const auto* analytic = dynamic_cast<const AnalyticObjective*>(&objective)) {
      L = analytic->local_lipschitz(x, rho * s.cwiseAbs().maxCoeff());
    }
  }
  if (!L || !(*L > 0.0)) throw UnsupportedObjective(objective.name() + " has no usable L");

  CountedObjective counted(objective);
  const double gamma = central_difference_gamma(counted, x, s, rho, std::nullopt);
  const double d = static_cast<double>(x.size());

  DeltaAudit out;
  out.L = *L;
  out.gamma = gamma;
  out.directional_derivative = s.dot(objective.gradient(x));
  out.alpha_dynamic = std::abs(gamma) / (*L * d);
  out.alpha_optimal = std::abs(out.directional_derivative) / (*L * d);
  out.abs_delta = std::abs(out.alpha_dynamic - out.alpha_optimal);
  out.bound = rho * s.squaredNorm() / (2.0 * d);
  // Rounding in gamma is O(eps |f| / rho); allow it on top of the bound.
  const double f_scale = std::max({1.0, std::abs(counted.objective().value(x, std::nullopt))});
  const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * f_scale / (rho * *L * d);
  out.holds = out.abs_delta <= out.bound + rounding;
  return out;
}

// ---------------------------------------------------------------------------
// Progressive bounds
// ---------------------------------------------------------------------------

ProgressiveCheck progressive_bound_check(const Objective& objective,
                                         const Eigen::Ref<const ParamVector>& x,
                                         ProgressiveLemma lemma, double eps_g, std::uint64_t n_mc,
                                         std::uint64_t seed, double A, double B) {
  if (!(eps_g > 0.0)) throw PreconditionError("eps_g must be > 0");
  if (!objective.has_gradient()) {
    throw UnsupportedObjective(objective.name() + " has no gradient oracle");
  }
  if (n_mc < 2) throw PreconditionError("n_mc must be >= 2");
  const double grad_norm = objective.gradient(x).norm();
  if (grad_norm < eps_g) {
    throw PreconditionError("gradient norm " + std::to_string(grad_norm) + " is below eps_g " +
                            std::to_string(eps_g));
  }
  const SmoothnessConstants c = objective.smoothness();
  const double d = static_cast<double>(x.size());
  double denominator = 0.0;
  if (lemma == ProgressiveLemma::GeneralSmooth) {
    if (!c.L) throw UnsupportedObjective(objective.name() + " declares no L");
    denominator = *c.L;
  } else {
    if (!c.L0 || !c.L1) throw UnsupportedObjective(objective.name() + " declares no (L0, L1)");
    denominator = A * *c.L0 + B * *c.L1 * eps_g;
  }

  ProgressiveCheck out;
  out.step = std::numbers::sqrt2 * eps_g / (2.0 * denominator * d);
  out.bound = eps_g * eps_g / (4.0 * denominator * d);
  out.samples = n_mc;

  const double f0 = objective.value(x, std::nullopt);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t i = 0; i < n_mc; ++i) {
    const ParamVector s =
        sample_perturbation<double>(Distribution::Rademacher, step_seed(seed, i), x.size(), false);
    const double f_plus = objective.value(x + out.step * s, std::nullopt);
    const double f_minus = objective.value(x - out.step * s, std::nullopt);
    const double change = std::min(f_plus, f_minus) - f0;
    sum += change;
    sum_sq += change * change;
  }
  const double n = static_cast<double>(n_mc);
  out.mean_change = sum / n;
  const double variance = std::max(0.0, (sum_sq - n * out.mean_change * out.mean_change) / (n - 1));
  out.standard_error = std::sqrt(variance / n);
  out.passes = out.mean_change <= -out.bound + 3.0 * out.standard_error;
  return out;
}

// ---------------------------------------------------------------------------
// Descent constants
// ---------------------------------------------------------------------------

DescentConstants descent_constants_series(double c) {
  if (!(c > 0.0)) throw DomainError("descent constants need c > 0");
  // B = sum_{n>=0} c^n/(n+1)!,  A = 1 + sum_{n>=1} n c^n/(n+1)!.
  double power = 1.0;      // c^n
  double factorial = 1.0;  // (n+1)!
  double B = 0.0;
  double A = 1.0;
  for (int n = 0; n < 200; ++n) {
    factorial *= static_cast<double>(n + 1);
    const double term = power / factorial;
    B += term;
    A += static_cast<double>(n) * term;
    if (n > 2 && term * static_cast<double>(n + 1) < 1e-18 * A) break;
    power *= c;
  }
  return {A, B};
}

DescentConstants descent_constants_direct(double c) {
  if (!(c > 0.0)) throw DomainError("descent constants need c > 0");
  const double B = std::expm1(c) / c;
  return {1.0 + std::exp(c) - B, B};
}

DescentConstants descent_constants(double c) {
  if (!(c > 0.0)) throw DomainError("descent constants need c > 0");
  return c < 1e-3 ? descent_constants_series(c) : descent_constants_direct(c);
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

void SmoothnessProfile::validate() const {
  if (d < 1) throw InvalidDimension("profile dimension must be >= 1");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  if (!(gap >= 0.0)) throw DomainError("f(x0) - f* must be >= 0");
  if (!(A > 0.0) || !(B > 0.0)) throw DomainError("A and B must be > 0");
  if (assumption == SmoothnessAssumption::General) {
    if (!(L > 0.0)) throw DomainError("L must be > 0");
  } else {
    if (!(L0 > 0.0)) throw DomainError("L0 must be > 0");
    if (!(L1 >= 0.0)) throw DomainError("L1 must be >= 0");
  }
}

double complexity_general(const SmoothnessProfile& profile, int option, double value) {
  profile.validate();
  const double d = static_cast<double>(profile.d);
  const double eps2 = profile.epsilon * profile.epsilon;
  if (option == 1) {
    if (!(value > 0.0)) throw DomainError("alpha0 must be > 0");
    const double inner = profile.gap / value + profile.L * value / 2.0;
    return ceil_count(2.0 * d / eps2 * inner * inner);
  }
  if (option == 2) {
    if (!(value > 0.0)) throw DomainError("rho must be > 0");
    const double denominator = eps2 - value * value / 2.0;
    if (!(denominator > 0.0)) {
      throw InfeasibleParameter("Option 2 needs rho^2 < 2 eps^2");
    }
    return ceil_count(4.0 * profile.L * d * profile.gap / denominator);
  }
  throw DomainError("general-smooth complexity covers options 1 and 2");
}

std::string_view to_string(GradientSource source) {
  switch (source) {
    case GradientSource::Oracle:
      return "oracle";
    case GradientSource::Probes:
      return "probes";
    case GradientSource::Supplied:
      return "supplied";
  }
  return "unknown";
}

GradientEstimate estimate_gradient_norm(const Objective& objective,
                                        const Eigen::Ref<const ParamVector>& x, double rho,
                                        std::uint64_t seed, int directions) {
  if (objective.has_gradient()) return {objective.gradient(x).norm(), GradientSource::Oracle};
  if (directions < 1) throw DomainError("need at least one probe direction");
  CountedObjective counted(objective);
  double sum = 0.0;
  for (int i = 0; i < directions; ++i) {
    const ParamVector s = sample_perturbation<double>(
        Distribution::Rademacher, step_seed(seed, static_cast<std::uint64_t>(i)), x.size(), false);
    sum += std::abs(central_difference_gamma(counted, x, s, rho, std::nullopt));
  }
  return {std::numbers::sqrt2 * sum / directions, GradientSource::Probes};
}

RegimeReport classify_regime(const SmoothnessProfile& profile, const GradientEstimate& gradient,
                             std::optional<double> xi) {
  profile.validate();
  const double A = profile.A;
  const double B = profile.B;
  const double L0 = profile.L0;
  const double L1 = profile.L1;
  const double eps = profile.epsilon;
  const double gap = profile.gap;
  const double d = static_cast<double>(profile.d);
  const double r = std::numbers::sqrt2 * B * L1;  // sqrt(2) B L1

  RegimeReport report;
  report.gradient = gradient;
  report.threshold = r == 1.0 ? std::numeric_limits<double>::infinity() : A * L0 / std::abs(1.0 - r);

  const bool small_l1 = r <= 1.0;
  const bool large_gradient = gradient.norm >= report.threshold;
  if (small_l1) {
    report.condition = large_gradient && std::isfinite(report.threshold) ? 1 : 2;
  } else {
    report.condition = gradient.norm <= report.threshold ? 3 : 4;
  }

  switch (report.condition) {
    case 1:
      report.predicted_K = ceil_count(8.0 * d * gap / eps);
      break;
    case 2:
      report.predicted_K = ceil_count(8.0 * A * L0 * d * gap / ((1.0 - r) * eps * eps));
      break;
    case 3:
      report.predicted_K =
          ceil_count(8.0 * A * L0 * d * gap * (2.0 * r - 1.0) / ((r - 1.0) * eps * eps));
      break;
    default:
      report.predicted_K =
          ceil_count(8.0 * (2.0 * r - 1.0) * (r - 1.0) * std::max(0.0, gap - eps) * d / (A * L0));
      report.loss_decrease_only = true;
      report.caveat =
          "decreasing loss value instead of gradient norm; eps-stationarity is not certified";
      break;
  }

  std::ostringstream rho;
  if (report.condition == 1) {
    rho << "rho <= 1 / (d * sqrt(2 * xi * sqrt(d)))";
    if (xi && *xi > 0.0) report.rho_bound = 1.0 / (d * std::sqrt(2.0 * *xi * std::sqrt(d)));
  } else {
    rho << "rho <= (1/d) * sqrt(eps / (2 * xi * (A*L0 + sqrt(2)*B*L1*eps) * sqrt(d)))";
    if (xi && *xi > 0.0) {
      report.rho_bound =
          std::sqrt(eps / (2.0 * *xi * (A * L0 + r * eps) * std::sqrt(d))) / d;
    }
  }
  if (xi && *xi == 0.0) report.rho_bound = std::numeric_limits<double>::infinity();
  report.rho_requirement = rho.str();
  return report;
}

RelaxedComplexity complexity_relaxed(const SmoothnessProfile& profile, int option,
                                     const GradientEstimate& gradient, std::optional<double> xi) {
  if (profile.assumption != SmoothnessAssumption::Relaxed) {
    throw DomainError("complexity_relaxed needs a relaxed-smooth profile");
  }
  profile.validate();
  RelaxedComplexity out;
  if (option == 3) {
    const double sd = std::sqrt(static_cast<double>(profile.d));
    const double inner =
        sd + (profile.A * profile.L0 * sd + profile.B * profile.L1 * profile.gap * sd) /
                 profile.epsilon;
    out.predicted_K = ceil_count(inner * inner);
    return out;
  }
  if (option == 4) {
    out.regime = classify_regime(profile, gradient, xi);
    out.predicted_K = out.regime->predicted_K;
    return out;
  }
  throw DomainError("relaxed-smooth complexity covers options 3 and 4");
}

std::optional<double> certified_xi(const AnalyticObjective& objective,
                                   const Eigen::Ref<const ParamVector>& x, double radius) {
  const auto bound = objective.third_order_bound(x, radius);
  if (!bound) return std::nullopt;
  return *bound / 6.0;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidDimension("xs and ys differ in length");
  if (xs.size() < 2) throw PreconditionError("need at least two points to fit a slope");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!(xs[idx] > 0.0) || !(ys[idx] > 0.0)) throw DomainError("log-log fit needs positive data");
    design(i, 0) = std::log(xs[idx]);
    design(i, 1) = 1.0;
    target[i] = std::log(ys[idx]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  SlopeFit fit;
  fit.slope = coef[0];
  fit.intercept = coef[1];
  fit.points = xs.size();
  if (n < 3) {
    fit.ci_low = -std::numeric_limits<double>::infinity();
    fit.ci_high = std::numeric_limits<double>::infinity();
    return fit;
  }
  const Eigen::VectorXd residual = target - design * coef;
  const double dof = static_cast<double>(n - 2);
  const double s2 = residual.squaredNorm() / dof;
  const double mean_x = design.col(0).mean();
  const double sxx = (design.col(0).array() - mean_x).square().sum();
  const double se = std::sqrt(s2 / sxx);
  boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * se;
  fit.ci_high = fit.slope + t * se;
  return fit;
}

}  // namespace zo
