// SPDX-License-Identifier: Apache-2.0
#include "zo/core.hpp"

#include <string>

namespace zo {

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::Rademacher:
      return "rademacher";
    case Distribution::Normal:
      return "normal";
    case Distribution::Uniform:
      return "uniform";
  }
  return "unknown";
}

Distribution distribution_from_string(std::string_view name) {
  if (name == "rademacher") return Distribution::Rademacher;
  if (name == "normal") return Distribution::Normal;
  if (name == "uniform") return Distribution::Uniform;
  throw ConfigError("distribution", "unknown distribution '" + std::string(name) + "'");
}

ParamVector Objective::gradient(const Eigen::Ref<const ParamVector>&) const {
  throw UnsupportedObjective(name() + " has no gradient oracle");
}

double evaluate_finite(CountedObjective& objective, const Eigen::Ref<const ParamVector>& x,
                       const std::optional<BatchSelector>& batch) {
  const double f = objective(x, batch);
  if (!std::isfinite(f)) {
    throw NonFiniteLoss("non-finite loss " + std::to_string(f), ParamVector(x), f);
  }
  return f;
}

SymmetricProbe central_difference(CountedObjective& objective,
                                  const Eigen::Ref<const ParamVector>& x,
                                  const Eigen::Ref<const ParamVector>& s, double rho,
                                  const std::optional<BatchSelector>& batch) {
  if (!(rho > 0.0)) throw InvalidSmoothingParameter("rho must be > 0");
  if (x.size() != s.size() || x.size() != objective.dim()) {
    throw InvalidDimension("x, s and objective must share a dimension");
  }
  SymmetricProbe probe;
  probe.f_plus = evaluate_finite(objective, x + rho * s, batch);
  probe.f_minus = evaluate_finite(objective, x - rho * s, batch);
  probe.gamma = (probe.f_plus - probe.f_minus) / (2.0 * rho);
  return probe;
}

}  // namespace zo
