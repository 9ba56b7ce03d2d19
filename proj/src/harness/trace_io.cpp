// SPDX-License-Identifier: Apache-2.0
#include "zo/harness/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace zo::harness {

using nlohmann::json;

namespace {

constexpr const char* kCsvColumns = "k,step_seed,gamma,beta,sigma,alpha,loss,queries,grad_norm,losses";

json encode(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json encode(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(encode(v));
  return out;
}

double decode(const json& j, std::size_t line, const char* key) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(line, std::string("field '") + key + "' is not a number");
}

const json& field(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw ParseError(line, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key, std::size_t line) {
  return decode(field(j, key, line), line, key);
}

template <typename T>
T integer(const json& j, const char* key, std::size_t line) {
  const json& v = field(j, key, line);
  if (!v.is_number_integer()) {
    throw ParseError(line, std::string("field '") + key + "' is not an integer");
  }
  return v.get<T>();
}

std::string text(const json& j, const char* key, std::size_t line) {
  const json& v = field(j, key, line);
  if (!v.is_string()) throw ParseError(line, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::string csv_cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

double parse_cell(std::string_view cell, std::size_t line) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError(line, "bad number '" + std::string(cell) + "'");
  }
  return value;
}

template <typename T>
T parse_integer(std::string_view cell, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError(line, "bad integer '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const RunTrace& trace, const TraceMeta& meta) {
  json header{{"type", "header"},
              {"optimizer", meta.optimizer},
              {"objective", meta.objective},
              {"dim", meta.dim},
              {"run_seed", trace.run_seed},
              {"initial_loss", encode(trace.initial_loss)},
              {"initial_grad_norm", encode(trace.initial_grad_norm)}};
  out << header.dump() << '\n';
  for (const StepRecord& r : trace.steps) {
    json step{{"type", "step"},
              {"k", r.k},
              {"step_seed", r.step_seed},
              {"gamma", encode(r.gamma)},
              {"beta", encode(r.beta)},
              {"sigma", encode(r.sigma)},
              {"alpha", encode(r.alpha)},
              {"losses", encode(r.losses)},
              {"loss", encode(r.loss)},
              {"queries", r.queries},
              {"grad_norm", encode(r.grad_norm)}};
    out << step.dump() << '\n';
  }
  std::vector<double> x(trace.final_x.data(), trace.final_x.data() + trace.final_x.size());
  json end{{"type", "end"},
           {"status", std::string(to_string(trace.status))},
           {"queries", trace.queries},
           {"final_loss", encode(trace.final_loss)},
           {"final_grad_norm", encode(trace.final_grad_norm)},
           {"final_x", encode(x)}};
  out << end.dump() << '\n';
}

LoadedTrace read_trace_jsonl(std::istream& in) {
  LoadedTrace loaded;
  RunTrace& trace = loaded.trace;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  bool seen_end = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (seen_end) throw ParseError(line_no, "content after the end record");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
    const std::string type = text(j, "type", line_no);
    if (!seen_header) {
      if (type != "header") throw ParseError(line_no, "first record must be the header");
      loaded.meta.optimizer = text(j, "optimizer", line_no);
      loaded.meta.objective = text(j, "objective", line_no);
      loaded.meta.dim = integer<Eigen::Index>(j, "dim", line_no);
      trace.run_seed = integer<std::uint64_t>(j, "run_seed", line_no);
      trace.initial_loss = number(j, "initial_loss", line_no);
      trace.initial_grad_norm = number(j, "initial_grad_norm", line_no);
      seen_header = true;
    } else if (type == "step") {
      StepRecord r;
      r.k = integer<std::int64_t>(j, "k", line_no);
      r.step_seed = integer<std::uint64_t>(j, "step_seed", line_no);
      r.gamma = number(j, "gamma", line_no);
      r.beta = number(j, "beta", line_no);
      r.sigma = number(j, "sigma", line_no);
      r.alpha = number(j, "alpha", line_no);
      const json& losses = field(j, "losses", line_no);
      if (!losses.is_array()) throw ParseError(line_no, "field 'losses' is not an array");
      for (const json& v : losses) r.losses.push_back(decode(v, line_no, "losses"));
      r.loss = number(j, "loss", line_no);
      r.queries = integer<std::uint64_t>(j, "queries", line_no);
      r.grad_norm = number(j, "grad_norm", line_no);
      trace.steps.push_back(std::move(r));
    } else if (type == "end") {
      try {
        trace.status = run_status_from_string(text(j, "status", line_no));
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
      trace.queries = integer<std::uint64_t>(j, "queries", line_no);
      trace.final_loss = number(j, "final_loss", line_no);
      trace.final_grad_norm = number(j, "final_grad_norm", line_no);
      const json& x = field(j, "final_x", line_no);
      if (!x.is_array()) throw ParseError(line_no, "field 'final_x' is not an array");
      trace.final_x.resize(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) {
        trace.final_x[static_cast<Eigen::Index>(i)] = decode(x[i], line_no, "final_x");
      }
      seen_end = true;
    } else {
      throw ParseError(line_no, "unknown record type '" + type + "'");
    }
  }
  if (!seen_header) throw ParseError(line_no + 1, "missing header record");
  if (!seen_end) throw ParseError(line_no + 1, "missing end record");
  return loaded;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, const TraceMeta& meta) {
  out << "# optimizer=" << meta.optimizer << '\n'
      << "# objective=" << meta.objective << '\n'
      << "# dim=" << meta.dim << '\n'
      << "# run_seed=" << trace.run_seed << '\n'
      << "# initial_loss=" << csv_cell(trace.initial_loss) << '\n'
      << "# initial_grad_norm=" << csv_cell(trace.initial_grad_norm) << '\n'
      << kCsvColumns << '\n';
  for (const StepRecord& r : trace.steps) {
    out << r.k << ',' << r.step_seed << ',' << csv_cell(r.gamma) << ',' << csv_cell(r.beta) << ','
        << csv_cell(r.sigma) << ',' << csv_cell(r.alpha) << ',' << csv_cell(r.loss) << ','
        << r.queries << ',' << csv_cell(r.grad_norm) << ',';
    for (std::size_t i = 0; i < r.losses.size(); ++i) {
      if (i > 0) out << ';';
      out << format_double(r.losses[i]);
    }
    out << '\n';
  }
  out << "# status=" << to_string(trace.status) << '\n'
      << "# queries=" << trace.queries << '\n'
      << "# final_loss=" << csv_cell(trace.final_loss) << '\n'
      << "# final_grad_norm=" << csv_cell(trace.final_grad_norm) << '\n'
      << "# final_x=";
  for (Eigen::Index i = 0; i < trace.final_x.size(); ++i) {
    if (i > 0) out << ';';
    out << format_double(trace.final_x[i]);
  }
  out << '\n';
}

LoadedTrace read_trace_csv(std::istream& in) {
  LoadedTrace loaded;
  RunTrace& trace = loaded.trace;
  std::map<std::string, std::pair<std::string, std::size_t>> meta;
  std::string line;
  std::size_t line_no = 0;
  bool seen_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, "metadata line without '='");
      meta[line.substr(2, eq - 2)] = {line.substr(eq + 1), line_no};
      continue;
    }
    if (!seen_columns) {
      if (line != kCsvColumns) throw ParseError(line_no, "unexpected column header");
      seen_columns = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 10) throw ParseError(line_no, "expected 10 columns");
    StepRecord r;
    r.k = parse_integer<std::int64_t>(cells[0], line_no);
    r.step_seed = parse_integer<std::uint64_t>(cells[1], line_no);
    r.gamma = parse_cell(cells[2], line_no);
    r.beta = parse_cell(cells[3], line_no);
    r.sigma = parse_cell(cells[4], line_no);
    r.alpha = parse_cell(cells[5], line_no);
    r.loss = parse_cell(cells[6], line_no);
    r.queries = parse_integer<std::uint64_t>(cells[7], line_no);
    r.grad_norm = parse_cell(cells[8], line_no);
    if (!cells[9].empty()) {
      for (auto v : split(cells[9], ';')) r.losses.push_back(parse_cell(v, line_no));
    }
    trace.steps.push_back(std::move(r));
  }
  if (!seen_columns) throw ParseError(line_no + 1, "missing column header");

  auto get = [&](const char* key) -> const std::pair<std::string, std::size_t>& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(line_no + 1, std::string("missing metadata '") + key + "'");
    return it->second;
  };
  loaded.meta.optimizer = get("optimizer").first;
  loaded.meta.objective = get("objective").first;
  loaded.meta.dim = parse_integer<Eigen::Index>(get("dim").first, get("dim").second);
  trace.run_seed = parse_integer<std::uint64_t>(get("run_seed").first, get("run_seed").second);
  trace.initial_loss = parse_cell(get("initial_loss").first, get("initial_loss").second);
  trace.initial_grad_norm =
      parse_cell(get("initial_grad_norm").first, get("initial_grad_norm").second);
  try {
    trace.status = run_status_from_string(get("status").first);
  } catch (const ConfigError& e) {
    throw ParseError(get("status").second, e.what());
  }
  trace.queries = parse_integer<std::uint64_t>(get("queries").first, get("queries").second);
  trace.final_loss = parse_cell(get("final_loss").first, get("final_loss").second);
  trace.final_grad_norm = parse_cell(get("final_grad_norm").first, get("final_grad_norm").second);
  const auto& [x_text, x_line] = get("final_x");
  if (!x_text.empty()) {
    const auto parts = split(x_text, ';');
    trace.final_x.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      trace.final_x[static_cast<Eigen::Index>(i)] = parse_cell(parts[i], x_line);
    }
  }
  return loaded;
}

void write_trace(const std::filesystem::path& path, const RunTrace& trace, const TraceMeta& meta,
                 TraceFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (format == TraceFormat::Jsonl) {
    write_trace_jsonl(out, trace, meta);
  } else {
    write_trace_csv(out, trace, meta);
  }
}

LoadedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return path.extension() == ".csv" ? read_trace_csv(in) : read_trace_jsonl(in);
}

std::string trace_file_name(std::uint64_t seed, TraceFormat format) {
  return "trace_seed" + std::to_string(seed) + (format == TraceFormat::Jsonl ? ".jsonl" : ".csv");
}

}  // namespace zo::harness
