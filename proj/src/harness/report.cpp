// SPDX-License-Identifier: Apache-2.0
#include "zo/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace zo::harness {

namespace {

constexpr const char* kRescaleNote =
    "# rescaled_queries: STP queries * 2/3 (3 queries per step vs 2 for two-probe methods); "
    "other optimizers unchanged";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

Curve aggregate_curve(const std::vector<LoadedTrace>& traces) {
  if (traces.empty()) throw PreconditionError("report needs at least one trace");
  Curve curve;
  curve.optimizer = traces.front().meta.optimizer;
  std::size_t length = traces.front().trace.steps.size();
  for (const auto& t : traces) {
    if (t.meta.optimizer != curve.optimizer) {
      throw PreconditionError("traces mix optimizers " + curve.optimizer + " and " +
                              t.meta.optimizer);
    }
    length = std::min(length, t.trace.steps.size());
  }
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < length; ++i) {
    CurveRow row;
    row.step = traces.front().trace.steps[i].k;
    row.queries = traces.front().trace.steps[i].queries;
    double sum = 0.0;
    for (const auto& t : traces) sum += t.trace.steps[i].loss;
    row.mean = sum / n;
    double sq = 0.0;
    for (const auto& t : traces) {
      const double dv = t.trace.steps[i].loss - row.mean;
      sq += dv * dv;
    }
    row.std = std::sqrt(sq / n);
    curve.rows.push_back(row);
  }
  return curve;
}

double rescaled_queries(const std::string& optimizer, std::uint64_t queries) {
  const double q = static_cast<double>(queries);
  return optimizer == "stp" ? q * 2.0 / 3.0 : q;
}

void write_curve_csv(std::ostream& out, const Curve& curve, bool rescale_stp) {
  if (rescale_stp) out << kRescaleNote << '\n';
  out << "step,queries," << (rescale_stp ? "rescaled_queries," : "") << "mean_loss,std_loss\n";
  for (const CurveRow& r : curve.rows) {
    out << r.step << ',' << r.queries << ',';
    if (rescale_stp) out << format_double(rescaled_queries(curve.optimizer, r.queries)) << ',';
    out << format_double(r.mean) << ',' << format_double(r.std) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<Curve>& curves, bool rescale_stp) {
  if (rescale_stp) out << kRescaleNote << '\n';
  out << "optimizer,queries," << (rescale_stp ? "rescaled_queries," : "")
      << "mean_loss,std_loss\n";
  for (const Curve& c : curves) {
    for (const CurveRow& r : c.rows) {
      out << c.optimizer << ',' << r.queries << ',';
      if (rescale_stp) out << format_double(rescaled_queries(c.optimizer, r.queries)) << ',';
      out << format_double(r.mean) << ',' << format_double(r.std) << '\n';
    }
  }
}

std::vector<Acceleration> acceleration_ratios(const std::vector<Curve>& curves,
                                              const std::string& reference_optimizer) {
  const auto ref = std::find_if(curves.begin(), curves.end(), [&](const Curve& c) {
    return c.optimizer == reference_optimizer;
  });
  if (ref == curves.end() || ref->rows.empty()) {
    throw PreconditionError("acceleration ratio needs a non-empty " + reference_optimizer +
                            " curve");
  }
  const double reference = ref->rows.back().mean;
  auto first_reach = [&](const Curve& c) -> std::optional<std::uint64_t> {
    for (const CurveRow& r : c.rows) {
      if (r.mean <= reference) return r.queries;
    }
    return std::nullopt;
  };
  const auto ref_queries = first_reach(*ref);
  std::vector<Acceleration> out;
  for (const Curve& c : curves) {
    Acceleration a;
    a.optimizer = c.optimizer;
    a.queries_to_reference = first_reach(c);
    if (a.queries_to_reference && ref_queries && *ref_queries > 0) {
      a.ratio = static_cast<double>(*a.queries_to_reference) / static_cast<double>(*ref_queries);
    }
    out.push_back(a);
  }
  return out;
}

void write_acceleration_csv(std::ostream& out, const std::vector<Acceleration>& rows,
                            double reference_loss) {
  out << "# acceleration_ratio = (queries for the optimizer's mean loss to reach the reference)"
         " / (queries for vs2p to reach it); reference = vs2p final mean loss = "
      << format_double(reference_loss) << "; N/A = never reached\n";
  out << "optimizer,queries_to_reference,acceleration_ratio\n";
  for (const Acceleration& a : rows) {
    out << a.optimizer << ','
        << (a.queries_to_reference ? std::to_string(*a.queries_to_reference) : "N/A") << ','
        << (a.ratio ? format_double(*a.ratio) : "N/A") << '\n';
  }
}

std::vector<std::filesystem::path> cmd_report(const std::vector<std::filesystem::path>& traces,
                                              const std::filesystem::path& out_dir,
                                              bool rescale_stp) {
  if (traces.empty()) throw PreconditionError("report needs at least one trace file");
  std::map<std::string, std::vector<LoadedTrace>> groups;
  std::vector<std::string> order;
  for (const auto& path : traces) {
    LoadedTrace t = read_trace(path);
    if (!groups.contains(t.meta.optimizer)) order.push_back(t.meta.optimizer);
    groups[t.meta.optimizer].push_back(std::move(t));
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  std::vector<Curve> curves;
  for (const auto& name : order) {
    curves.push_back(aggregate_curve(groups[name]));
    const auto path = out_dir / ("curve_" + name + ".csv");
    auto out = open_out(path);
    write_curve_csv(out, curves.back(), rescale_stp);
    written.push_back(path);
  }
  if (curves.size() > 1) {
    const auto path = out_dir / "comparison.csv";
    auto out = open_out(path);
    write_comparison_csv(out, curves, rescale_stp);
    written.push_back(path);
    const auto ref = std::find_if(curves.begin(), curves.end(),
                                  [](const Curve& c) { return c.optimizer == "vs2p"; });
    if (ref != curves.end() && !ref->rows.empty()) {
      const auto accel_path = out_dir / "acceleration.csv";
      auto accel = open_out(accel_path);
      write_acceleration_csv(accel, acceleration_ratios(curves), ref->rows.back().mean);
      written.push_back(accel_path);
    }
  }
  return written;
}

}  // namespace zo::harness
