// SPDX-License-Identifier: Apache-2.0
#include "zo/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace zo::harness {

using nlohmann::json;

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / n);
  return out;
}

json encode(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int exit_code_for(const SummaryStats& summary, const ExperimentConfig& config) {
  return summary.diverged > 0 && config.run.fail_on_divergence ? kExitFailure : kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

SeedSummary summarize_trace(const RunTrace& trace) {
  SeedSummary s;
  s.seed = trace.run_seed;
  s.final_loss = trace.final_loss;
  s.status = trace.status;
  s.queries = trace.queries;
  double best = trace.initial_loss;
  auto consider = [&](double v) {
    if (std::isfinite(v) && (!std::isfinite(best) || v < best)) best = v;
  };
  for (const StepRecord& r : trace.steps) consider(r.loss);
  consider(trace.final_loss);
  s.best_loss = best;
  if (trace.status == RunStatus::TargetReached) s.queries_to_target = trace.queries;
  return s;
}

SummaryStats summarize(const std::vector<RunTrace>& traces) {
  SummaryStats out;
  std::vector<double> finals;
  std::vector<double> bests;
  for (const RunTrace& t : traces) {
    SeedSummary s = summarize_trace(t);
    finals.push_back(s.final_loss);
    bests.push_back(s.best_loss);
    switch (s.status) {
      case RunStatus::Completed:
        ++out.completed;
        break;
      case RunStatus::TargetReached:
        ++out.target_reached;
        break;
      case RunStatus::Diverged:
        ++out.diverged;
        break;
    }
    out.seeds.push_back(s);
  }
  const MeanStd f = population_stats(finals);
  const MeanStd b = population_stats(bests);
  out.mean_final_loss = f.mean;
  out.std_final_loss = f.std;
  out.mean_best_loss = b.mean;
  out.std_best_loss = b.std;
  return out;
}

json to_json(const SummaryStats& summary) {
  json seeds = json::array();
  for (const SeedSummary& s : summary.seeds) {
    json entry{{"seed", s.seed},
               {"final_loss", encode(s.final_loss)},
               {"best_loss", encode(s.best_loss)},
               {"status", std::string(to_string(s.status))},
               {"queries", s.queries}};
    entry["queries_to_target"] =
        s.queries_to_target ? json(*s.queries_to_target) : json(nullptr);
    seeds.push_back(entry);
  }
  return json{{"seeds", seeds},
              {"mean_final_loss", encode(summary.mean_final_loss)},
              {"std_final_loss", encode(summary.std_final_loss)},
              {"mean_best_loss", encode(summary.mean_best_loss)},
              {"std_best_loss", encode(summary.std_best_loss)},
              {"status_counts",
               {{"completed", summary.completed},
                {"target_reached", summary.target_reached},
                {"diverged", summary.diverged}}}};
}

SummaryStats summary_from_json(const json& j) {
  SummaryStats out;
  for (const json& e : j.at("seeds")) {
    SeedSummary s;
    s.seed = e.at("seed").get<std::uint64_t>();
    s.final_loss = decode(e.at("final_loss"));
    s.best_loss = decode(e.at("best_loss"));
    s.status = run_status_from_string(e.at("status").get<std::string>());
    s.queries = e.at("queries").get<std::uint64_t>();
    if (!e.at("queries_to_target").is_null()) {
      s.queries_to_target = e.at("queries_to_target").get<std::uint64_t>();
    }
    out.seeds.push_back(s);
  }
  out.mean_final_loss = decode(j.at("mean_final_loss"));
  out.std_final_loss = decode(j.at("std_final_loss"));
  out.mean_best_loss = decode(j.at("mean_best_loss"));
  out.std_best_loss = decode(j.at("std_best_loss"));
  const json& c = j.at("status_counts");
  out.completed = c.at("completed").get<std::size_t>();
  out.target_reached = c.at("target_reached").get<std::size_t>();
  out.diverged = c.at("diverged").get<std::size_t>();
  return out;
}

SummaryStats summary_from_traces(const std::vector<std::filesystem::path>& paths) {
  std::vector<RunTrace> traces;
  for (const auto& p : paths) traces.push_back(read_trace(p).trace);
  return summarize(traces);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RunOptions run_options(const ExperimentConfig& config, const Objective& objective,
                       std::uint64_t seed) {
  RunOptions options;
  options.run_seed = seed;
  options.budget = config.run.budget;
  options.epsilon = config.run.epsilon;
  options.perturbation = {config.run.distribution, config.run.normalized};
  options.batch_size = config.run.batch_size;
  options.x0 = initial_point(objective, config.objective);
  return options;
}

TraceMeta trace_meta(const ExperimentConfig& config, const Objective& objective) {
  return {std::string(to_string(config.optimizer.kind)), objective.name(), objective.dim()};
}

std::vector<RunTrace> run_seeds(const ExperimentConfig& config, int jobs) {
  config.validate();
  const auto objective = build_objective(config.objective);
  std::vector<RunTrace> traces(config.run.seeds.size());
  parallel_for(traces.size(), jobs, [&](std::size_t i) {
    traces[i] = run(*objective, config.optimizer, run_options(config, *objective, config.run.seeds[i]));
  });
  return traces;
}

namespace {

SummaryStats write_run_outputs(const ExperimentConfig& config, const Objective& objective,
                               const std::vector<RunTrace>& traces,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const TraceMeta meta = trace_meta(config, objective);
  for (const RunTrace& t : traces) {
    write_trace(out_dir / trace_file_name(t.run_seed, config.output.format), t, meta,
                config.output.format);
  }
  SummaryStats summary = summarize(traces);
  write_json(out_dir / "summary.json", to_json(summary));
  return summary;
}

}  // namespace

RunOutcome cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir, int jobs) {
  config.validate();
  const auto objective = build_objective(config.objective);
  std::vector<RunTrace> traces(config.run.seeds.size());
  parallel_for(traces.size(), jobs, [&](std::size_t i) {
    traces[i] = run(*objective, config.optimizer, run_options(config, *objective, config.run.seeds[i]));
  });
  RunOutcome outcome;
  outcome.summary = write_run_outputs(config, *objective, traces, out_dir);
  outcome.exit_code = exit_code_for(outcome.summary, config);
  return outcome;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

SweepOutcome cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       int jobs) {
  config.validate();
  if (!config.sweep) throw ConfigError("sweep", "required by the sweep command");
  const SweepSpec& spec = *config.sweep;

  std::vector<ExperimentConfig> point_configs;
  for (double v : spec.values) {
    ExperimentConfig c = config;
    c.sweep.reset();
    if (spec.parameter == "eta") {
      c.optimizer.eta = v;
    } else {
      c.optimizer.alpha0 = v;
    }
    try {
      c.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("sweep.values", std::string("grid value rejected: ") + e.what());
    }
    point_configs.push_back(std::move(c));
  }

  const auto objective = build_objective(config.objective);
  const std::size_t n_seeds = config.run.seeds.size();
  std::vector<std::vector<RunTrace>> traces(point_configs.size(), std::vector<RunTrace>(n_seeds));
  parallel_for(point_configs.size() * n_seeds, jobs, [&](std::size_t task) {
    const std::size_t p = task / n_seeds;
    const std::size_t s = task % n_seeds;
    const ExperimentConfig& c = point_configs[p];
    traces[p][s] = run(*objective, c.optimizer, run_options(c, *objective, c.run.seeds[s]));
  });

  SweepOutcome outcome;
  std::filesystem::create_directories(out_dir);
  for (std::size_t p = 0; p < point_configs.size(); ++p) {
    SweepPoint point;
    point.value = spec.values[p];
    point.summary = write_run_outputs(point_configs[p], *objective, traces[p],
                                      out_dir / ("point_" + std::to_string(p)));
    point.excluded = point.summary.diverged == point.summary.seeds.size();
    if (point.summary.diverged > 0 && config.run.fail_on_divergence && !point.excluded) {
      outcome.exit_code = kExitFailure;
    }
    outcome.points.push_back(std::move(point));
  }
  for (std::size_t p = 0; p < outcome.points.size(); ++p) {
    const SweepPoint& point = outcome.points[p];
    if (point.excluded || !std::isfinite(point.summary.mean_final_loss)) continue;
    if (!outcome.best ||
        point.summary.mean_final_loss < outcome.points[*outcome.best].summary.mean_final_loss) {
      outcome.best = p;
    }
  }
  if (outcome.best) outcome.points[*outcome.best].best = true;

  std::ofstream csv(out_dir / "sweep.csv");
  if (!csv) throw Error("cannot write sweep.csv");
  write_sweep_csv(csv, outcome, spec.parameter);
  return outcome;
}

void write_sweep_csv(std::ostream& out, const SweepOutcome& sweep, const std::string& parameter) {
  out << parameter << ",mean_final_loss,std_final_loss,completed,target_reached,diverged,excluded,best\n";
  for (const SweepPoint& p : sweep.points) {
    out << format_double(p.value) << ',' << format_double(p.summary.mean_final_loss) << ','
        << format_double(p.summary.std_final_loss) << ',' << p.summary.completed << ','
        << p.summary.target_reached << ',' << p.summary.diverged << ',' << (p.excluded ? 1 : 0)
        << ',' << (p.best ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

ExperimentConfig config_for_dim(const ExperimentConfig& config, Eigen::Index d) {
  ExperimentConfig c = config;
  c.scaling.reset();
  c.sweep.reset();
  if (c.objective.family == "logreg") {
    c.objective.features = d - 1;
  } else {
    c.objective.dim = d;
  }
  if (config.scaling && config.scaling->budget_per_dim) {
    c.run.budget = *config.scaling->budget_per_dim * static_cast<std::uint64_t>(d);
  }
  if (config.scaling && config.scaling->theory_horizon) {
    const auto objective = build_objective(c.objective);
    const ParamVector x0 = initial_point(*objective, c.objective);
    const auto f_star = objective->minimum_value();
    if (!f_star) throw ConfigError("scaling.theory_horizon", "objective has no known minimum");
    const double gap = objective->value(x0, std::nullopt) - *f_star;
    const SmoothnessConstants sc = objective->smoothness();
    SmoothnessProfile profile;
    profile.epsilon = *c.run.epsilon;
    profile.gap = gap;
    profile.d = objective->dim();
    profile.A = c.optimizer.A;
    profile.B = c.optimizer.B;
    if (c.optimizer.kind == StepRuleKind::S2POption1) {
      const auto L = c.optimizer.L ? c.optimizer.L : sc.L;
      if (!L) throw ConfigError("optimizer.L", "required by theory_horizon");
      profile.L = *L;
      const double alpha0 = std::sqrt(2.0 * gap / *L);
      c.optimizer.alpha0 = alpha0;
      c.optimizer.K = static_cast<std::int64_t>(complexity_general(profile, 1, alpha0));
    } else if (c.optimizer.kind == StepRuleKind::S2POption3) {
      profile.assumption = SmoothnessAssumption::Relaxed;
      const auto L0 = c.optimizer.L0 ? c.optimizer.L0 : sc.L0;
      const auto L1 = c.optimizer.L1 ? c.optimizer.L1 : sc.L1;
      if (!L0 || !L1) throw ConfigError("optimizer.L0", "L0 and L1 required by theory_horizon");
      profile.L0 = *L0;
      profile.L1 = *L1;
      c.optimizer.K = static_cast<std::int64_t>(complexity_relaxed(profile, 3, {}).predicted_K);
    } else {
      throw ConfigError("scaling.theory_horizon", "applies to s2p-opt1 and s2p-opt3 only");
    }
  }
  return c;
}

ScalingOutcome cmd_scaling(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                           int jobs) {
  config.validate();
  if (!config.scaling) throw ConfigError("scaling", "required by the scaling command");
  const auto& dims = config.scaling->dims;

  std::vector<ExperimentConfig> configs;
  std::vector<std::shared_ptr<const Objective>> objectives;
  for (Eigen::Index d : dims) {
    configs.push_back(config_for_dim(config, d));
    configs.back().validate();
    objectives.push_back(build_objective(configs.back().objective));
  }

  const std::size_t n_seeds = config.run.seeds.size();
  std::vector<std::vector<RunTrace>> traces(dims.size(), std::vector<RunTrace>(n_seeds));
  parallel_for(dims.size() * n_seeds, jobs, [&](std::size_t task) {
    const std::size_t p = task / n_seeds;
    const std::size_t s = task % n_seeds;
    const ExperimentConfig& c = configs[p];
    traces[p][s] = run(*objectives[p], c.optimizer, run_options(c, *objectives[p], c.run.seeds[s]));
  });

  ScalingOutcome outcome;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t p = 0; p < dims.size(); ++p) {
    ScalingPoint point;
    point.dim = dims[p];
    point.budget = configs[p].run.budget;
    point.K = configs[p].optimizer.K;
    point.alpha0 = configs[p].optimizer.alpha0;
    std::vector<double> sorted;
    for (const RunTrace& t : traces[p]) {
      const SeedSummary s = summarize_trace(t);
      point.queries.push_back(s.queries_to_target);
      sorted.push_back(s.queries_to_target ? static_cast<double>(*s.queries_to_target)
                                           : std::numeric_limits<double>::infinity());
      if (t.status == RunStatus::Diverged && config.run.fail_on_divergence) {
        outcome.exit_code = kExitFailure;
      }
    }
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (std::isfinite(median)) point.median = median;
    if (point.median && *point.median > 0.0) {
      xs.push_back(static_cast<double>(point.dim));
      ys.push_back(*point.median);
    } else {
      outcome.excluded_dims.push_back(point.dim);
    }
    outcome.points.push_back(std::move(point));
  }
  if (xs.size() >= 2) outcome.fit = loglog_slope(xs, ys);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "scaling.csv");
  if (!csv) throw Error("cannot write scaling.csv");
  write_scaling_csv(csv, outcome);

  json fit;
  if (outcome.fit) {
    fit = {{"slope", outcome.fit->slope},
           {"ci_low", encode(outcome.fit->ci_low)},
           {"ci_high", encode(outcome.fit->ci_high)},
           {"intercept", outcome.fit->intercept},
           {"points", outcome.fit->points}};
  } else {
    fit = {{"slope", nullptr}};
  }
  fit["excluded_dims"] = outcome.excluded_dims;
  write_json(out_dir / "scaling_fit.json", fit);
  return outcome;
}

void write_scaling_csv(std::ostream& out, const ScalingOutcome& scaling) {
  out << "dim,median_queries,censored,seeds_reached,seeds,budget,K,alpha0\n";
  for (const ScalingPoint& p : scaling.points) {
    const auto reached = std::count_if(p.queries.begin(), p.queries.end(),
                                       [](const auto& q) { return q.has_value(); });
    out << p.dim << ',' << (p.median ? format_double(*p.median) : std::string()) << ','
        << (p.censored() ? 1 : 0) << ',' << reached << ',' << p.queries.size() << ',' << p.budget
        << ',' << (p.K ? std::to_string(*p.K) : std::string()) << ','
        << (p.alpha0 ? format_double(*p.alpha0) : std::string()) << '\n';
  }
  if (scaling.fit) {
    out << "# slope=" << format_double(scaling.fit->slope)
        << " ci95=[" << format_double(scaling.fit->ci_low) << ','
        << format_double(scaling.fit->ci_high) << "] points=" << scaling.fit->points << '\n';
  } else {
    out << "# slope unavailable: fewer than two uncensored points\n";
  }
}

}  // namespace zo::harness
