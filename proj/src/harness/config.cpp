// SPDX-License-Identifier: Apache-2.0
#include "zo/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>

#include "zo/objectives.hpp"

namespace zo::harness {

using nlohmann::json;

std::string_view to_string(TraceFormat format) {
  return format == TraceFormat::Jsonl ? "jsonl" : "csv";
}

TraceFormat trace_format_from_string(std::string_view name) {
  if (name == "jsonl") return TraceFormat::Jsonl;
  if (name == "csv") return TraceFormat::Csv;
  throw ConfigError("format", "expected jsonl or csv, got '" + std::string(name) + "'");
}

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_object(const json& j, const std::string& prefix,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* key) { return item.key() == key; });
    if (!known) throw ConfigError(join(prefix, item.key()), "unknown key");
  }
}

template <typename T>
void read(const json& j, const std::string& prefix, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(prefix, key), std::string("wrong type: ") + e.what());
  }
}

template <typename T>
void read(const json& j, const std::string& prefix, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T value{};
  read(j, prefix, key, value);
  out = value;
}

template <typename Enum, typename Parse>
void read_enum(const json& j, const std::string& prefix, const char* key, Enum& out, Parse parse) {
  if (!j.contains(key)) return;
  std::string name;
  read(j, prefix, key, name);
  try {
    out = parse(name);
  } catch (const Error& e) {
    throw ConfigError(join(prefix, key), e.what());
  }
}

template <typename T>
void write(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

std::optional<std::uint64_t> parse_seed(std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

}  // namespace

json rule_to_json(const StepSizeRule& rule) {
  json j;
  j["kind"] = std::string(to_string(rule.kind));
  write(j, "alpha0", rule.alpha0);
  write(j, "L", rule.L);
  write(j, "L0", rule.L0);
  write(j, "L1", rule.L1);
  j["A"] = rule.A;
  j["B"] = rule.B;
  j["rho"] = rule.rho;
  write(j, "eta", rule.eta);
  j["tau_a"] = rule.tau_a;
  j["tau_b"] = rule.tau_b;
  write(j, "K", rule.K);
  j["decay"] = std::string(to_string(rule.decay));
  j["gamma_window"] = rule.gamma_window;
  j["signed_sigma"] = rule.signed_sigma;
  j["raw_beta_sign"] = rule.raw_beta_sign;
  return j;
}

StepSizeRule rule_from_json(const json& j, const std::string& prefix) {
  check_object(j, prefix,
               {"kind", "alpha0", "L", "L0", "L1", "A", "B", "rho", "eta", "tau_a", "tau_b", "K",
                "decay", "gamma_window", "signed_sigma", "raw_beta_sign"});
  if (!j.contains("kind")) throw ConfigError(join(prefix, "kind"), "required");
  StepSizeRule rule;
  read_enum(j, prefix, "kind", rule.kind, step_rule_from_string);
  read(j, prefix, "alpha0", rule.alpha0);
  read(j, prefix, "L", rule.L);
  read(j, prefix, "L0", rule.L0);
  read(j, prefix, "L1", rule.L1);
  read(j, prefix, "A", rule.A);
  read(j, prefix, "B", rule.B);
  read(j, prefix, "rho", rule.rho);
  read(j, prefix, "eta", rule.eta);
  read(j, prefix, "tau_a", rule.tau_a);
  read(j, prefix, "tau_b", rule.tau_b);
  read(j, prefix, "K", rule.K);
  read_enum(j, prefix, "decay", rule.decay, decay_from_string);
  read(j, prefix, "gamma_window", rule.gamma_window);
  read(j, prefix, "signed_sigma", rule.signed_sigma);
  read(j, prefix, "raw_beta_sign", rule.raw_beta_sign);
  return rule;
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["schema_version"] = config.schema_version;

  const ObjectiveSpec& o = config.objective;
  json obj;
  obj["family"] = o.family;
  obj["dim"] = o.dim;
  obj["condition"] = o.condition;
  obj["scale"] = o.scale;
  obj["seed"] = o.seed;
  obj["init_scale"] = o.init_scale;
  obj["n_samples"] = o.n_samples;
  obj["features"] = o.features;
  obj["widths"] = o.widths;
  obj["activation"] = o.activation;
  j["objective"] = obj;

  j["optimizer"] = rule_to_json(config.optimizer);

  const RunSpec& r = config.run;
  json run;
  run["budget"] = r.budget;
  write(run, "epsilon", r.epsilon);
  run["seeds"] = r.seeds;
  run["distribution"] = std::string(to_string(r.distribution));
  run["normalized"] = r.normalized;
  write(run, "batch_size", r.batch_size);
  run["fail_on_divergence"] = r.fail_on_divergence;
  j["run"] = run;

  j["output"] = {{"dir", config.output.dir},
                 {"format", std::string(to_string(config.output.format))}};

  if (config.sweep) {
    j["sweep"] = {{"parameter", config.sweep->parameter}, {"values", config.sweep->values}};
  }
  if (config.scaling) {
    json s;
    s["dims"] = config.scaling->dims;
    write(s, "budget_per_dim", config.scaling->budget_per_dim);
    s["theory_horizon"] = config.scaling->theory_horizon;
    j["scaling"] = s;
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_object(j, "",
               {"schema_version", "objective", "optimizer", "run", "output", "sweep", "scaling"});
  ExperimentConfig config;
  if (!j.contains("schema_version")) throw ConfigError("schema_version", "required");
  read(j, "", "schema_version", config.schema_version);
  if (config.schema_version != kSchemaVersion) {
    throw ConfigError("schema_version",
                      "unsupported version " + std::to_string(config.schema_version));
  }

  if (j.contains("objective")) {
    const json& o = j.at("objective");
    const std::string p = "objective";
    check_object(o, p,
                 {"family", "dim", "condition", "scale", "seed", "init_scale", "n_samples",
                  "features", "widths", "activation"});
    ObjectiveSpec& spec = config.objective;
    read(o, p, "family", spec.family);
    read(o, p, "dim", spec.dim);
    read(o, p, "condition", spec.condition);
    read(o, p, "scale", spec.scale);
    read(o, p, "seed", spec.seed);
    read(o, p, "init_scale", spec.init_scale);
    read(o, p, "n_samples", spec.n_samples);
    read(o, p, "features", spec.features);
    read(o, p, "widths", spec.widths);
    read(o, p, "activation", spec.activation);
  }

  if (!j.contains("optimizer")) throw ConfigError("optimizer", "required");
  config.optimizer = rule_from_json(j.at("optimizer"));

  if (j.contains("run")) {
    const json& r = j.at("run");
    const std::string p = "run";
    check_object(r, p,
                 {"budget", "epsilon", "seeds", "distribution", "normalized", "batch_size",
                  "fail_on_divergence"});
    RunSpec& spec = config.run;
    read(r, p, "budget", spec.budget);
    read(r, p, "epsilon", spec.epsilon);
    read(r, p, "seeds", spec.seeds);
    read_enum(r, p, "distribution", spec.distribution, distribution_from_string);
    read(r, p, "normalized", spec.normalized);
    read(r, p, "batch_size", spec.batch_size);
    read(r, p, "fail_on_divergence", spec.fail_on_divergence);
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_object(o, "output", {"dir", "format"});
    read(o, "output", "dir", config.output.dir);
    read_enum(o, "output", "format", config.output.format, trace_format_from_string);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_object(s, "sweep", {"parameter", "values"});
    SweepSpec sweep;
    read(s, "sweep", "parameter", sweep.parameter);
    read(s, "sweep", "values", sweep.values);
    config.sweep = sweep;
  }

  if (j.contains("scaling")) {
    const json& s = j.at("scaling");
    check_object(s, "scaling", {"dims", "budget_per_dim", "theory_horizon"});
    ScalingSpec scaling;
    read(s, "scaling", "dims", scaling.dims);
    read(s, "scaling", "budget_per_dim", scaling.budget_per_dim);
    read(s, "scaling", "theory_horizon", scaling.theory_horizon);
    config.scaling = scaling;
  }

  config.validate();
  return config;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> families{"quadratic", "quartic",    "exponential",
                                              "rosenbrock", "logreg", "mlp"};
  if (!families.contains(objective.family)) {
    throw ConfigError("objective.family", "unknown family '" + objective.family + "'");
  }
  if (objective.family != "logreg" && objective.family != "mlp" && objective.dim < 1) {
    throw ConfigError("objective.dim", "must be >= 1");
  }
  if (objective.family == "mlp" && objective.widths.size() < 2) {
    throw ConfigError("objective.widths", "needs inputs and classes");
  }
  if (objective.family == "logreg" && objective.features < 1) {
    throw ConfigError("objective.features", "must be >= 1");
  }
  if (objective.family == "quadratic" && !(objective.condition >= 1.0)) {
    throw ConfigError("objective.condition", "must be >= 1");
  }
  try {
    optimizer.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("optimizer." + e.field(), e.what());
  }
  if (run.seeds.empty()) throw ConfigError("run.seeds", "must not be empty");
  if (run.budget < static_cast<std::uint64_t>(query_cost(optimizer.kind))) {
    throw ConfigError("run.budget", "smaller than one step's query cost");
  }
  if (run.epsilon && !(*run.epsilon > 0.0)) throw ConfigError("run.epsilon", "must be > 0");
  if (run.batch_size && *run.batch_size < 1) throw ConfigError("run.batch_size", "must be >= 1");
  if (sweep) {
    if (sweep->parameter != "eta" && sweep->parameter != "alpha0") {
      throw ConfigError("sweep.parameter", "expected eta or alpha0");
    }
    if (sweep->values.empty()) throw ConfigError("sweep.values", "grid must not be empty");
  }
  if (scaling) {
    if (scaling->dims.size() < 3) throw ConfigError("scaling.dims", "needs at least 3 dimensions");
    if (!run.epsilon) throw ConfigError("run.epsilon", "required by scaling");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config", "cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

std::vector<std::uint64_t> resolve_seeds(const std::vector<std::uint64_t>& config_seeds,
                                         const std::optional<std::vector<std::uint64_t>>& flag,
                                         const char* env_value) {
  if (flag) {
    if (flag->empty()) throw ConfigError("--seeds", "must not be empty");
    return *flag;
  }
  if (env_value != nullptr && *env_value != '\0') {
    const auto seed = parse_seed(env_value);
    if (!seed) {
      throw ConfigError(kSeedEnvVar, "not an unsigned integer: '" + std::string(env_value) + "'");
    }
    return {*seed};
  }
  if (config_seeds.empty()) throw ConfigError("run.seeds", "must not be empty");
  return config_seeds;
}

std::shared_ptr<const Objective> build_objective(const ObjectiveSpec& spec) {
  const std::uint64_t batch = spec.n_samples;
  if (spec.family == "quadratic") {
    return std::make_shared<QuadraticObjective>(make_quadratic(spec.dim, spec.condition, spec.seed));
  }
  if (spec.family == "quartic") return make_relaxed_smooth(AnalyticFamily::Quartic, spec.dim, spec.scale);
  if (spec.family == "exponential") {
    return make_relaxed_smooth(AnalyticFamily::Exponential, spec.dim, spec.scale);
  }
  if (spec.family == "rosenbrock") return std::make_shared<RosenbrockObjective>(spec.dim);
  if (spec.family == "logreg") {
    return std::make_shared<LogisticRegressionObjective>(
        make_logreg(spec.n_samples, spec.features, spec.seed, batch));
  }
  if (spec.family == "mlp") {
    return std::make_shared<TinyMLPObjective>(make_tiny_mlp(
        spec.widths, activation_from_string(spec.activation), spec.n_samples, spec.seed, batch));
  }
  throw ConfigError("objective.family", "unknown family '" + spec.family + "'");
}

ParamVector initial_point(const Objective& objective, const ObjectiveSpec& spec) {
  return objective.initial_point(spec.seed, spec.init_scale);
}

}  // namespace zo::harness
