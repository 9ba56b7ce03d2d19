// SPDX-License-Identifier: Apache-2.0
//
// Numerical checks of the convergence theory: Khintchine bounds for random
// directions, the dynamic step-size error, one-step progress bounds,
// descent-inequality constants and query-complexity predictions.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Core>

#include "zo/core.hpp"
#include "zo/objectives.hpp"

namespace zo {

inline constexpr int kMaxKhintchineEnumerationDim = 20;

// ---------------------------------------------------------------------------
// Khintchine
// ---------------------------------------------------------------------------

/// E|<g, s>| over all 2^d sign vectors next to the bounds ||g||/sqrt(2) and
/// ||g||. For integer g the verdicts are decided in exact integer
/// arithmetic; for floating g they allow a few ulps of rounding.
struct KhintchineExact {
  double expectation = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_holds = false;
  bool upper_holds = false;
  /// E == ||g||, decided exactly for integer g.
  bool upper_tight = false;
};

template <typename Derived>
KhintchineExact khintchine_exact(const Eigen::MatrixBase<Derived>& g) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = g.size();
  if (d > kMaxKhintchineEnumerationDim) {
    throw PreconditionError("dim " + std::to_string(d) +
                            " is too large to enumerate; use khintchine_mc");
  }
  const std::uint64_t count = std::uint64_t{1} << d;

  KhintchineExact out;
  if constexpr (std::is_integral_v<Scalar>) {
    // Gray-code walk: one coordinate flips per pattern.
    __int128 inner = 0;
    __int128 norm_sq = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      inner -= static_cast<__int128>(g[i]);
      norm_sq += static_cast<__int128>(g[i]) * static_cast<__int128>(g[i]);
    }
    __int128 total = inner < 0 ? -inner : inner;
    std::uint64_t signs = 0;
    for (std::uint64_t m = 1; m < count; ++m) {
      const int bit = __builtin_ctzll(m);
      signs ^= std::uint64_t{1} << bit;
      const __int128 gi = static_cast<__int128>(g[bit]);
      inner += (signs >> bit & 1U) ? 2 * gi : -2 * gi;
      total += inner < 0 ? -inner : inner;
    }
    // E = total / 2^d. Compare squares: lower <=> 2 total^2 >= ||g||^2 4^d.
    const __int128 scaled_norm_sq = norm_sq << (2 * d);
    out.lower_holds = 2 * total * total >= scaled_norm_sq;
    out.upper_holds = total * total <= scaled_norm_sq;
    out.upper_tight = total * total == scaled_norm_sq;
    out.expectation = static_cast<double>(total) / static_cast<double>(count);
    const double norm = std::sqrt(static_cast<double>(norm_sq));
    out.lower = norm / std::sqrt(2.0);
    out.upper = norm;
  } else {
    long double total = 0.0L;
    for (std::uint64_t m = 0; m < count; ++m) {
      long double inner = 0.0L;
      for (Eigen::Index i = 0; i < d; ++i) {
        const long double gi = static_cast<long double>(g[i]);
        inner += (m >> i & 1U) ? gi : -gi;
      }
      total += inner < 0 ? -inner : inner;
    }
    out.expectation = static_cast<double>(total / static_cast<long double>(count));
    const double norm = static_cast<double>(g.template cast<double>().norm());
    out.lower = norm / std::sqrt(2.0);
    out.upper = norm;
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(norm, 1e-300);
    out.lower_holds = out.expectation >= out.lower - slack;
    out.upper_holds = out.expectation <= out.upper + slack;
    out.upper_tight = std::abs(out.expectation - out.upper) <= slack;
  }
  return out;
}

/// Monte-Carlo estimate of E|<g, s>| with a 99% confidence half-width.
struct KhintchineMC {
  double estimate = 0.0;
  double half_width = 0.0;
  /// ||g||/sqrt(2), or ||g||/sqrt(2d) for normalized directions.
  double lower = 0.0;
  /// ||g||, or ||g||/sqrt(d) for normalized directions.
  double upper = 0.0;
  std::uint64_t samples = 0;
  bool passes = false;
};

KhintchineMC khintchine_mc(const Eigen::Ref<const ParamVector>& g, std::uint64_t n_samples,
                           Distribution distribution, bool normalized, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dynamic step-size error
// ---------------------------------------------------------------------------

struct DeltaAudit {
  double gamma = 0.0;
  double directional_derivative = 0.0;
  double alpha_dynamic = 0.0;
  double alpha_optimal = 0.0;
  double abs_delta = 0.0;
  /// rho ||s||^2 / (2d); equals rho/2 for Rademacher directions.
  double bound = 0.0;
  double L = 0.0;
  bool holds = false;
};

/// Compares |gamma|/(L d) with |s^T grad f(x)|/(L d). L comes from
/// `L_override`, else the objective's declared L, else a certified local L
/// on the probe box. Throws UnsupportedObjective without a gradient oracle
/// or any usable L.
DeltaAudit delta_error_audit(const Objective& objective, const Eigen::Ref<const ParamVector>& x,
                             const Eigen::Ref<const ParamVector>& s, double rho,
                             std::optional<double> L_override = std::nullopt);

// ---------------------------------------------------------------------------
// One-step progress
// ---------------------------------------------------------------------------

enum class ProgressiveLemma { GeneralSmooth, RelaxedSmooth };

struct ProgressiveCheck {
  double step = 0.0;
  /// Monte-Carlo mean of f(x_next) - f(x); negative means progress.
  double mean_change = 0.0;
  double standard_error = 0.0;
  /// Guaranteed expected decrease (positive).
  double bound = 0.0;
  std::uint64_t samples = 0;
  bool passes = false;
};

/// Runs n_mc independent S2P steps from x with the certified step size
/// sqrt(2) eps_g / (2 L d) or sqrt(2) eps_g / (2 (A L0 + B L1 eps_g) d) and
/// checks mean change <= -bound + 3 SE. Throws PreconditionError if
/// ||grad f(x)|| < eps_g or eps_g <= 0.
ProgressiveCheck progressive_bound_check(const Objective& objective,
                                         const Eigen::Ref<const ParamVector>& x,
                                         ProgressiveLemma lemma, double eps_g, std::uint64_t n_mc,
                                         std::uint64_t seed, double A = 1.01, double B = 1.01);

// ---------------------------------------------------------------------------
// Descent-inequality constants
// ---------------------------------------------------------------------------

struct DescentConstants {
  double A = 1.0;
  double B = 1.0;
};

/// A = 1 + e^c - (e^c - 1)/c, B = (e^c - 1)/c. Throws DomainError for c <= 0.
DescentConstants descent_constants(double c);
/// Power series in c; accurate for small c.
DescentConstants descent_constants_series(double c);
/// Closed form through expm1.
DescentConstants descent_constants_direct(double c);

// ---------------------------------------------------------------------------
// Query complexity
// ---------------------------------------------------------------------------

enum class SmoothnessAssumption { General, Relaxed };

struct SmoothnessProfile {
  SmoothnessAssumption assumption = SmoothnessAssumption::General;
  double L = 1.0;
  double L0 = 1.0;
  double L1 = 0.0;
  double A = 1.01;
  double B = 1.01;
  double epsilon = 0.1;
  /// f(x0) - f*.
  double gap = 1.0;
  Eigen::Index d = 1;

  void validate() const;
};

/// Complexity bound for S2P Options 1 (value = alpha0) or 2 (value = rho),
/// rounded up. Option 2 with rho^2 >= 2 eps^2 throws InfeasibleParameter.
double complexity_general(const SmoothnessProfile& profile, int option, double value);

enum class GradientSource { Oracle, Probes, Supplied };
std::string_view to_string(GradientSource source);

struct GradientEstimate {
  double norm = 0.0;
  GradientSource source = GradientSource::Supplied;
};

/// Oracle norm when available, else sqrt(2) times the mean |gamma| over
/// `directions` Rademacher probes (an upper estimate by Khintchine).
GradientEstimate estimate_gradient_norm(const Objective& objective,
                                        const Eigen::Ref<const ParamVector>& x, double rho,
                                        std::uint64_t seed, int directions = 32);

/// Regime of the dynamic relaxed-smooth step size (Option 4).
struct RegimeReport {
  int condition = 0;
  double threshold = 0.0;
  std::string rho_requirement;
  /// Numeric rho bound when a third-order constant xi is known.
  std::optional<double> rho_bound;
  double predicted_K = 0.0;
  std::string caveat;
  GradientEstimate gradient;
  /// True for condition 4: the guarantee is on loss, not gradient norm.
  bool loss_decrease_only = false;
};

/// Classifies (L1, ||grad f||) into one of the four regimes and returns
/// its complexity and rho requirement. `xi` bounds third-order behavior.
RegimeReport classify_regime(const SmoothnessProfile& profile, const GradientEstimate& gradient,
                             std::optional<double> xi = std::nullopt);

struct RelaxedComplexity {
  double predicted_K = 0.0;
  std::optional<RegimeReport> regime;
};

/// Option 3 closed form, or the Option 4 regime report.
RelaxedComplexity complexity_relaxed(const SmoothnessProfile& profile, int option,
                                     const GradientEstimate& gradient,
                                     std::optional<double> xi = std::nullopt);

/// xi for an analytic objective around x: a certified bound on the third
/// directional derivative over the box, divided by 6.
std::optional<double> certified_xi(const AnalyticObjective& objective,
                                   const Eigen::Ref<const ParamVector>& x, double radius);

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log y = slope log x + intercept with a 95% t
/// interval on the slope (infinite with fewer than three points).
SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace zo
