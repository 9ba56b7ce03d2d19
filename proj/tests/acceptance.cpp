// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "zo/harness/config.hpp"
#include "zo/harness/runner.hpp"
#include "zo/harness/verify.hpp"
#include "zo/objectives.hpp"
#include "zo/optimizers.hpp"
#include "zo/theory.hpp"

using namespace zo;
using namespace zo::harness;

namespace {

constexpr std::uint64_t kSeeds[] = {0, 1, 2};
constexpr int kJobs = 8;

struct Verdict {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(5) << v;
  return s.str();
}

Verdict from_rows(const std::vector<CheckRow>& rows) {
  Verdict v{true, ""};
  for (const auto& r : rows) {
    v.passed = v.passed && r.passed;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += r.check + ": " + r.observed + " vs " + r.bound;
  }
  return v;
}

// VS2P steps gathered from criteria 4 to 6 for the cap invariant.
struct CapLedger {
  std::uint64_t steps = 0;
  std::uint64_t violations = 0;
  double worst_ratio = 0.0;

  void add(const RunTrace& trace, const StepSizeRule& rule) {
    const double cap_scale = rule.rho * rule.tau_a / rule.tau_b;
    for (const StepRecord& r : trace.steps) {
      const double cap = rule.learning_rate(r.k) * cap_scale;
      ++steps;
      if (!(std::abs(r.alpha) <= cap)) ++violations;
      if (cap > 0.0) worst_ratio = std::max(worst_ratio, std::abs(r.alpha) / cap);
    }
  }
};

CapLedger cap_ledger;

std::vector<RunTrace> run_all(const Objective& f, const std::vector<StepSizeRule>& rules,
                              const std::vector<RunOptions>& options) {
  std::vector<RunTrace> out(options.size());
  parallel_for(options.size(), kJobs,
               [&](std::size_t i) { out[i] = run(f, rules[i], options[i]); });
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double queries_to_target(const RunTrace& t) {
  return t.status == RunStatus::TargetReached ? static_cast<double>(t.queries)
                                              : std::numeric_limits<double>::infinity();
}

StepSizeRule vs2p_rule(double eta, std::int64_t K) {
  StepSizeRule r;
  r.kind = StepRuleKind::VS2P;
  r.eta = eta;
  r.K = K;
  r.decay = Decay::Cosine;
  return r;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  const auto start = Clock::now();
  Verdict v = from_rows(verify_lemma31(12, 100, 1));
  const double t = seconds_since(start);
  v.passed = v.passed && t < 10.0;
  v.detail += "; " + fmt(t) + " s (limit 10)";
  return v;
}

Verdict criterion2() {
  const auto start = Clock::now();
  Verdict v = from_rows(verify_delta(1000, 2));
  const double t = seconds_since(start);
  v.passed = v.passed && t < 30.0;
  v.detail += "; " + fmt(t) + " s (limit 30)";
  return v;
}

Verdict criterion3() {
  const auto start = Clock::now();
  Verdict v = from_rows(verify_progressive(10000, 3));
  const double t = seconds_since(start);
  v.passed = v.passed && t < 60.0;
  v.detail += "; " + fmt(t) + " s (limit 60)";
  return v;
}

Verdict criterion4() {
  const auto start = Clock::now();
  Verdict v{true, ""};
  for (auto kind : {StepRuleKind::S2POption1, StepRuleKind::S2POption2}) {
    ExperimentConfig c;
    c.objective.family = "quadratic";
    c.objective.condition = 1.0;
    c.optimizer.kind = kind;
    if (kind == StepRuleKind::S2POption1) {
      c.optimizer.alpha0 = 1.0;
      c.optimizer.K = 1;
    } else {
      c.optimizer.L = 1.0;
    }
    c.run.epsilon = 0.1;
    c.run.budget = 10'000'000;
    c.run.seeds = {0, 1, 2};
    c.scaling = ScalingSpec{{10, 100, 1000}, std::nullopt, kind == StepRuleKind::S2POption1};
    const ScalingOutcome s = cmd_scaling(c, std::filesystem::temp_directory_path() /
                                                ("zo_acceptance_c4_" + std::string(to_string(kind))),
                                         kJobs);
    const bool ok = s.fit && s.excluded_dims.empty() && s.fit->slope >= 0.8 && s.fit->slope <= 1.2;
    v.passed = v.passed && ok;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += std::string(to_string(kind)) + " slope " + (s.fit ? fmt(s.fit->slope) : "n/a");
    if (s.fit) v.detail += " CI [" + fmt(s.fit->ci_low) + ", " + fmt(s.fit->ci_high) + "]";
    v.detail += " medians";
    for (const auto& p : s.points) v.detail += " " + (p.median ? fmt(*p.median) : "censored");
  }

  // VS2P on the largest unit quadratic, for the cap ledger.
  const QuadraticObjective q = make_quadratic(1000, 1.0, 0);
  const StepSizeRule rule = vs2p_rule(1.0, 20000);
  std::vector<RunOptions> opts;
  for (auto seed : kSeeds) opts.push_back({.run_seed = seed, .budget = 40000, .x0 = q.initial_point(0, 1.0)});
  for (const auto& t : run_all(q, {rule, rule, rule}, opts)) cap_ledger.add(t, rule);

  const double t = seconds_since(start);
  v.passed = v.passed && t < 600.0;
  v.detail += "; " + fmt(t) + " s (limit 600)";
  return v;
}

Verdict criterion5() {
  const auto start = Clock::now();
  const QuadraticObjective q = make_quadratic(100, 100.0, 0);
  const ParamVector x0 = q.initial_point(0, 1.0);
  const double eps = 0.1;
  const std::uint64_t budget = 1'000'000;

  StepSizeRule opt2;
  opt2.kind = StepRuleKind::S2POption2;
  opt2.L = *q.smoothness().L;
  std::vector<RunOptions> opts;
  for (auto seed : kSeeds) {
    opts.push_back({.run_seed = seed, .budget = budget, .epsilon = eps, .x0 = x0});
  }
  const auto dynamic = run_all(q, {opt2, opt2, opt2}, opts);

  // Option 1 with each alpha0 runs its certified horizon K(alpha0).
  SmoothnessProfile profile;
  profile.L = *q.smoothness().L;
  profile.epsilon = eps;
  profile.gap = q.value(x0, std::nullopt) - *q.minimum_value();
  profile.d = q.dim();
  const std::vector<double> grid{0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
  std::vector<StepSizeRule> rules;
  std::vector<RunOptions> grid_opts;
  for (double a0 : grid) {
    StepSizeRule r;
    r.kind = StepRuleKind::S2POption1;
    r.alpha0 = a0;
    r.K = static_cast<std::int64_t>(complexity_general(profile, 1, a0));
    for (const auto& o : opts) {
      rules.push_back(r);
      grid_opts.push_back(o);
    }
  }
  const auto stationary = run_all(q, rules, grid_opts);
  std::size_t best = 0;
  double best_median = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> qs;
    for (std::size_t s = 0; s < 3; ++s) qs.push_back(queries_to_target(stationary[g * 3 + s]));
    const double m = median(qs);
    if (m < best_median) {
      best_median = m;
      best = g;
    }
  }

  int wins = 0;
  std::string detail = "opt2 queries";
  for (const auto& t : dynamic) detail += " " + fmt(queries_to_target(t));
  detail += "; opt1 best alpha0 " + fmt(grid[best]) + " queries";
  for (std::size_t s = 0; s < 3; ++s) {
    const double opt1 = queries_to_target(stationary[best * 3 + s]);
    detail += " " + fmt(opt1);
    if (queries_to_target(dynamic[s]) < opt1) ++wins;
  }

  // VS2P on the same problem, for the cap ledger.
  const StepSizeRule vs2p = vs2p_rule(1.0, 50000);
  std::vector<RunOptions> vs_opts;
  for (auto seed : kSeeds) vs_opts.push_back({.run_seed = seed, .budget = 100000, .x0 = x0});
  for (const auto& t : run_all(q, {vs2p, vs2p, vs2p}, vs_opts)) cap_ledger.add(t, vs2p);

  const double t = seconds_since(start);
  detail += "; wins " + std::to_string(wins) + "/3 (need 2); " + fmt(t) + " s (limit 600)";
  return {wins >= 2 && t < 600.0, detail};
}

Verdict criterion6() {
  const auto start = Clock::now();
  const QuarticObjective f(10, 1.0);
  const StepSizeRule vs2p = vs2p_rule(5.0, 40000);
  const std::uint64_t budget = 80000;

  bool ok = true;
  std::ostringstream detail;
  for (auto seed : kSeeds) {
    const ParamVector x0 = f.initial_point(seed, 5.0);
    const double f0 = f.value(x0, std::nullopt);
    const double g0 = f.gradient(x0).norm();
    ok = ok && g0 >= 1e3;

    const RunTrace a = run(f, vs2p, {.run_seed = seed, .budget = budget, .x0 = x0});
    cap_ledger.add(a, vs2p);
    bool finite = a.status != RunStatus::Diverged && std::isfinite(a.final_loss);
    double ratio = 0.0;
    for (const auto& r : a.steps) {
      finite = finite && std::all_of(r.losses.begin(), r.losses.end(),
                                     [](double l) { return std::isfinite(l); });
      if (r.gamma != 0.0) ratio = std::max(ratio, std::abs(r.alpha) / std::abs(r.gamma));
    }
    const double vs2p_drop = (f0 - a.final_loss) / f0;

    StepSizeRule mezo;
    mezo.kind = StepRuleKind::MeZO;
    mezo.eta = ratio;
    const RunTrace b = run(f, mezo, {.run_seed = seed, .budget = budget, .x0 = x0});
    const bool mezo_fails = b.status == RunStatus::Diverged || (f0 - b.final_loss) / f0 < 0.9;

    ok = ok && finite && vs2p_drop >= 0.9 && mezo_fails;
    detail << "seed " << seed << ": |grad f0| " << fmt(g0) << ", vs2p drop " << fmt(vs2p_drop)
           << (finite ? "" : " NON-FINITE") << ", mezo eta " << fmt(ratio) << " "
           << (b.status == RunStatus::Diverged ? "diverged"
                                               : "drop " + fmt((f0 - b.final_loss) / f0))
           << "; ";
  }
  const double t = seconds_since(start);
  detail << fmt(t) << " s (limit 300)";
  return {ok && t < 300.0, detail.str()};
}

Verdict criterion7() {
  return {cap_ledger.steps > 0 && cap_ledger.violations == 0,
          std::to_string(cap_ledger.violations) + " violations over " +
              std::to_string(cap_ledger.steps) + " vs2p steps; max |alpha|/cap " +
              fmt(cap_ledger.worst_ratio)};
}

Verdict criterion8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  std::uniform_real_distribution<double> log_rho(-6.0, 0.0);
  const QuarticObjective f(16, 1.0);
  CountedObjective counted(f);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    ParamVector x(16);
    for (auto& v : x) v = unit(rng);
    const ParamVector s = sample_perturbation<double>(Distribution::Normal, rng(), 16, false);
    const double rho = std::pow(10.0, log_rho(rng));
    const double gamma = central_difference_gamma(counted, x, s, rho, std::nullopt);
    const ParamVector lhs = sign_trick_direction(gamma, s);
    const ParamVector rhs = -gamma * s;
    if (!(lhs.array() == rhs.array()).all()) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 1000 tuples"};
}

Verdict criterion9() { return from_rows(verify_constants()); }

Verdict criterion10() {
  const QuadraticObjective f = make_quadratic(8, 10.0, 1);
  bool ok = true;
  std::string detail;
  for (auto kind : {StepRuleKind::S2POption1, StepRuleKind::S2POption2, StepRuleKind::S2POption3,
                    StepRuleKind::S2POption4, StepRuleKind::VS2P, StepRuleKind::MeZO,
                    StepRuleKind::STPConstant}) {
    StepSizeRule r;
    r.kind = kind;
    r.alpha0 = 0.1;
    r.K = 1000;
    r.L = 10.0;
    r.L0 = 10.0;
    r.L1 = 0.1;
    r.eta = 0.01;
    CountedObjective counted(f);
    const int cost = query_cost(kind);
    const RunTrace t = run(counted, r, {.run_seed = 4, .budget = 100u * static_cast<unsigned>(cost)});
    const bool exact = t.steps.size() == 100 && counted.queries() == 100u * cost &&
                       t.queries == counted.queries();
    ok = ok && exact;
    detail += std::string(to_string(kind)) + " " + std::to_string(counted.queries()) + "/" +
              std::to_string(t.steps.size()) + " ";
  }
  return {ok, detail + "(queries/steps)"};
}

Verdict criterion11() {
  const auto start = Clock::now();
  const auto task = make_logreg(1000, 20, 0, 100);
  const ParamVector x0 = task.initial_point(0, 1.0);
  const double f0 = task.value(x0, std::nullopt);
  const double f_ref = *task.minimum_value();

  std::vector<std::pair<std::string, StepSizeRule>> optimizers;
  StepSizeRule opt1;
  opt1.kind = StepRuleKind::S2POption1;
  opt1.alpha0 = 1.0;
  opt1.K = 100000;
  optimizers.emplace_back("s2p-opt1", opt1);
  StepSizeRule opt2;
  opt2.kind = StepRuleKind::S2POption2;
  opt2.L = *task.smoothness().L;
  optimizers.emplace_back("s2p-opt2", opt2);
  optimizers.emplace_back("vs2p", vs2p_rule(1.0, 100000));
  StepSizeRule mezo;
  mezo.kind = StepRuleKind::MeZO;
  mezo.eta = 1e-3;
  optimizers.emplace_back("mezo", mezo);
  StepSizeRule stp;
  stp.kind = StepRuleKind::STPConstant;
  stp.eta = 1e-3;
  optimizers.emplace_back("stp", stp);

  std::vector<StepSizeRule> rules;
  std::vector<RunOptions> opts;
  for (const auto& [name, rule] : optimizers) {
    for (auto seed : kSeeds) {
      rules.push_back(rule);
      opts.push_back({.run_seed = seed, .budget = 200000, .batch_size = 100, .x0 = x0});
    }
  }
  const auto traces = run_all(task, rules, opts);
  bool ok = task.dim() <= 200;
  std::string detail = "gap " + fmt(f0 - f_ref) + "; fraction closed:";
  for (std::size_t o = 0; o < optimizers.size(); ++o) {
    detail += " " + optimizers[o].first;
    for (std::size_t s = 0; s < 3; ++s) {
      const RunTrace& t = traces[o * 3 + s];
      const double frac = (f0 - t.final_loss) / (f0 - f_ref);
      ok = ok && t.status != RunStatus::Diverged && t.queries <= 200000 && frac >= 0.5;
      detail += " " + fmt(frac);
    }
  }
  const double t = seconds_since(start);
  detail += "; " + fmt(t) + " s (limit 900)";
  return {ok && t < 900.0, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"khintchine exact enumeration", criterion1},
      {"delta error bound", criterion2},
      {"progressive bounds", criterion3},
      {"dimension scaling", criterion4},
      {"dynamic beats stationary", criterion5},
      {"gamma clipping robustness", criterion6},
      {"vs2p step cap", criterion7},
      {"sign trick equivalence", criterion8},
      {"descent constants", criterion9},
      {"query accounting", criterion10},
      {"logistic regression smoke", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.passed) ++failed;
    std::cout << "criterion " << std::setw(2) << i + 1 << " " << (v.passed ? "PASS" : "FAIL") << "  "
              << criteria[i].first << "  (" << v.detail << ")" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
