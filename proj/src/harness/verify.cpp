// SPDX-License-Identifier: Apache-2.0
#include "zo/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "zo/objectives.hpp"
#include "zo/theory.hpp"

namespace zo::harness {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

CheckRow row(std::string check, std::string observed, std::string bound, bool passed) {
  return {std::move(check), std::move(observed), std::move(bound), passed};
}

nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json to_json(const RegimeReport& report) {
  nlohmann::json j;
  j["condition"] = report.condition;
  j["threshold"] = number(report.threshold);
  j["rho_requirement"] = report.rho_requirement;
  j["rho_bound"] = report.rho_bound ? number(*report.rho_bound) : nlohmann::json(nullptr);
  j["predicted_K"] = number(report.predicted_K);
  j["caveat"] = report.caveat;
  j["gradient_norm"] = number(report.gradient.norm);
  j["gradient_source"] = std::string(zo::to_string(report.gradient.source));
  j["loss_decrease_only"] = report.loss_decrease_only;
  return j;
}

VerifySelector verify_selector_from_string(std::string_view name) {
  if (name == "lemma31") return VerifySelector::Lemma31;
  if (name == "delta") return VerifySelector::Delta;
  if (name == "progressive") return VerifySelector::Progressive;
  if (name == "constants") return VerifySelector::Constants;
  if (name == "complexity") return VerifySelector::Complexity;
  if (name == "all") return VerifySelector::All;
  throw ConfigError("selector", "unknown check '" + std::string(name) + "'");
}

std::vector<CheckRow> verify_lemma31(int max_dim, int per_dim, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<std::int64_t> entry(-1000, 1000);
  int passed = 0;
  int total = 0;
  for (int d = 1; d <= max_dim; ++d) {
    for (int i = 0; i < per_dim; ++i) {
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> g(d);
      for (int j = 0; j < d; ++j) g[j] = entry(engine);
      const KhintchineExact r = khintchine_exact(g);
      ++total;
      if (r.lower_holds && r.upper_holds) ++passed;
    }
  }
  return {row("khintchine exact enumeration d=1.." + std::to_string(max_dim),
              std::to_string(passed) + "/" + std::to_string(total), std::to_string(total),
              passed == total)};
}

std::vector<CheckRow> verify_delta(int samples, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const Eigen::Index d = 10;

  {
    const QuadraticObjective f = make_quadratic(d, 10.0, seed);
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < samples; ++i) {
      ParamVector x(d);
      for (Eigen::Index j = 0; j < d; ++j) x[j] = coord(engine);
      const ParamVector s = sample_perturbation<double>(Distribution::Rademacher,
                                                        step_seed(seed, i), d, false);
      const DeltaAudit a = delta_error_audit(f, x, s, 1e-3);
      worst = std::max(worst, a.abs_delta);
      ok = ok && a.holds;
    }
    rows.push_back(row("delta quadratic rho=1e-3", "max |delta| " + num(worst), "rho/2 = 5e-4", ok));
  }

  const QuarticObjective f(d, 1.0);
  for (double rho : {1e-1, 1e-2, 1e-3}) {
    int violations = 0;
    double sum_full = 0.0;
    double sum_half = 0.0;
    double worst_ratio = 0.0;
    for (int i = 0; i < samples; ++i) {
      ParamVector x(d);
      for (Eigen::Index j = 0; j < d; ++j) x[j] = coord(engine);
      const ParamVector s = sample_perturbation<double>(Distribution::Rademacher,
                                                        step_seed(seed + 1, i), d, false);
      const double L = *f.local_lipschitz(x, rho);
      const DeltaAudit full = delta_error_audit(f, x, s, rho, L);
      const DeltaAudit half = delta_error_audit(f, x, s, rho / 2.0, L);
      if (!full.holds || !half.holds) ++violations;
      worst_ratio = std::max(worst_ratio, full.abs_delta / full.bound);
      sum_full += full.abs_delta;
      sum_half += half.abs_delta;
    }
    rows.push_back(row("delta quartic rho=" + num(rho),
                       std::to_string(violations) + " violations, max |delta|/(rho/2) " +
                           num(worst_ratio),
                       "0 violations", violations == 0));
    const double shrink = sum_full / sum_half;
    rows.push_back(row("delta quartic shrink rho=" + num(rho) + " -> " + num(rho / 2),
                       num(shrink), ">= 3.5", shrink >= 3.5));
  }
  return rows;
}

std::vector<CheckRow> verify_progressive(std::uint64_t n_mc, std::uint64_t seed) {
  std::vector<CheckRow> rows;
  const Eigen::Index d = 10;
  {
    const QuadraticObjective f = make_quadratic(d, 1.0, seed);
    const ParamVector x =
        f.minimizer() + sample_perturbation<double>(Distribution::Normal, seed, d, true);
    const ProgressiveCheck c =
        progressive_bound_check(f, x, ProgressiveLemma::GeneralSmooth, 1.0, n_mc, seed);
    rows.push_back(row("progressive general-smooth quadratic",
                       "mean change " + num(c.mean_change) + " (SE " + num(c.standard_error) + ")",
                       "<= -" + num(c.bound) + " + 3 SE", c.passes));
  }
  {
    const auto f = make_relaxed_smooth(AnalyticFamily::Exponential, d, 1.0);
    // Every coordinate at ln(1/sqrt(d)) gives ||grad f|| = 1.
    const ParamVector x = ParamVector::Constant(d, std::log(1.0 / std::sqrt(static_cast<double>(d))));
    const ProgressiveCheck c =
        progressive_bound_check(*f, x, ProgressiveLemma::RelaxedSmooth, 1.0, n_mc, seed);
    rows.push_back(row("progressive relaxed-smooth exponential",
                       "mean change " + num(c.mean_change) + " (SE " + num(c.standard_error) + ")",
                       "<= -" + num(c.bound) + " + 3 SE", c.passes));
  }
  return rows;
}

std::vector<CheckRow> verify_constants() {
  std::vector<CheckRow> rows;
  const DescentConstants c = descent_constants(0.02);
  const double closed_a = 1.0 + std::exp(0.02) - (std::exp(0.02) - 1.0) / 0.02;
  rows.push_back(row("descent constants B(0.02)", num(c.B), "1.01005 +- 1e-4",
                     std::abs(c.B - 1.01005) <= 1e-4));
  rows.push_back(row("descent constants A(0.02)", num(c.A), num(closed_a) + " +- 1e-4",
                     std::abs(c.A - closed_a) <= 1e-4));
  double worst = 0.0;
  for (int i = 0; i <= 80; ++i) {
    const double cc = std::pow(10.0, -8.0 + 8.0 * i / 80.0);
    const DescentConstants s = descent_constants_series(cc);
    const DescentConstants dd = descent_constants_direct(cc);
    worst = std::max({worst, std::abs(s.A - dd.A) / std::abs(dd.A), std::abs(s.B - dd.B) / std::abs(dd.B)});
  }
  rows.push_back(row("descent constants series vs direct on [1e-8, 1]", num(worst), "<= 1e-12",
                     worst <= 1e-12));
  const DescentConstants lo = descent_constants(0.1);
  const DescentConstants hi = descent_constants(0.5);
  rows.push_back(row("descent constants monotone", "A(0.5)-A(0.1)=" + num(hi.A - lo.A) +
                         " B(0.5)-B(0.1)=" + num(hi.B - lo.B),
                     "> 0", hi.A > lo.A && hi.B > lo.B));
  return rows;
}

std::vector<CheckRow> verify_complexity() {
  std::vector<CheckRow> rows;
  SmoothnessProfile general;
  general.L = 1.0;
  general.epsilon = 0.1;
  general.gap = 1.0;
  general.d = 100;
  const double k1 = complexity_general(general, 1, 1.0);
  rows.push_back(row("complexity option 1", num(k1), "45000", k1 == 45000.0));
  const double rho = std::sqrt(2.0) * 0.1 / 100.0;
  const double k2 = complexity_general(general, 2, rho);
  rows.push_back(row("complexity option 2", num(k2), "40004 +- 1", std::abs(k2 - 40004.0) <= 1.0));
  bool infeasible = false;
  try {
    complexity_general(general, 2, 0.2);
  } catch (const InfeasibleParameter&) {
    infeasible = true;
  }
  rows.push_back(row("complexity option 2 rho^2 >= 2 eps^2", infeasible ? "rejected" : "accepted",
                     "rejected", infeasible));

  SmoothnessProfile relaxed;
  relaxed.assumption = SmoothnessAssumption::Relaxed;
  relaxed.L0 = 1.0;
  relaxed.L1 = 0.1;
  relaxed.epsilon = 0.1;
  relaxed.gap = 1.0;
  relaxed.d = 100;
  const double k3 = complexity_relaxed(relaxed, 3, {}).predicted_K;
  rows.push_back(row("complexity option 3", num(k3), "14665 +- 1", std::abs(k3 - 14665.21) <= 1.0));
  const GradientEstimate large{1e6, GradientSource::Supplied};
  const RegimeReport r1 = *complexity_relaxed(relaxed, 4, large).regime;
  rows.push_back(row("regime L1=0.1, large gradient", "condition " + std::to_string(r1.condition),
                     "condition 1", r1.condition == 1 && r1.predicted_K == 8000.0));
  relaxed.L1 = 1.0;
  const RegimeReport r4 = *complexity_relaxed(relaxed, 4, large).regime;
  rows.push_back(row("regime L1=1.0, large gradient", "condition " + std::to_string(r4.condition),
                     "condition 4 with loss caveat", r4.condition == 4 && r4.loss_decrease_only));
  return rows;
}

std::vector<CheckRow> run_verify(VerifySelector selector) {
  std::vector<CheckRow> rows;
  auto add = [&](std::vector<CheckRow> more) {
    rows.insert(rows.end(), more.begin(), more.end());
  };
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      add(fn());
    } catch (const std::exception& e) {
      rows.push_back(row(name, std::string("error: ") + e.what(), "-", false));
    }
  };
  const bool all = selector == VerifySelector::All;
  if (all || selector == VerifySelector::Lemma31) guarded("lemma31", [] { return verify_lemma31(); });
  if (all || selector == VerifySelector::Delta) guarded("delta", [] { return verify_delta(); });
  if (all || selector == VerifySelector::Progressive) {
    guarded("progressive", [] { return verify_progressive(); });
  }
  if (all || selector == VerifySelector::Constants) guarded("constants", [] { return verify_constants(); });
  if (all || selector == VerifySelector::Complexity) {
    guarded("complexity", [] { return verify_complexity(); });
  }
  return rows;
}

void print_check_table(std::ostream& out, const std::vector<CheckRow>& rows) {
  std::size_t w0 = 5;
  std::size_t w1 = 8;
  std::size_t w2 = 5;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.check.size());
    w1 = std::max(w1, r.observed.size());
    w2 = std::max(w2, r.bound.size());
  }
  auto line = [&](const std::string& a, const std::string& b, const std::string& c,
                  const std::string& v) {
    out << std::left << std::setw(static_cast<int>(w0)) << a << "  " << std::setw(static_cast<int>(w1))
        << b << "  " << std::setw(static_cast<int>(w2)) << c << "  " << v << '\n';
  };
  line("check", "observed", "bound", "verdict");
  for (const auto& r : rows) line(r.check, r.observed, r.bound, r.passed ? "PASS" : "FAIL");
}

}  // namespace zo::harness
