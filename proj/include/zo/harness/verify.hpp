// SPDX-License-Identifier: Apache-2.0
//
// Theory checks behind `zo_bench verify`. Failures are reported as rows,
// never thrown.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zo/theory.hpp"

namespace zo::harness {

struct CheckRow {
  std::string check;
  std::string observed;
  std::string bound;
  bool passed = false;
};

enum class VerifySelector { Lemma31, Delta, Progressive, Constants, Complexity, All };
VerifySelector verify_selector_from_string(std::string_view name);

std::vector<CheckRow> verify_lemma31(int max_dim = 12, int per_dim = 100, std::uint64_t seed = 1);
/// Quadratic exactness, quartic bound at rho in {1e-1, 1e-2, 1e-3}, and
/// the shrink ratio when rho halves.
std::vector<CheckRow> verify_delta(int samples = 1000, std::uint64_t seed = 2);
std::vector<CheckRow> verify_progressive(std::uint64_t n_mc = 10000, std::uint64_t seed = 3);
std::vector<CheckRow> verify_constants();
std::vector<CheckRow> verify_complexity();

/// Regime report as JSON. Infinite numbers are written as "inf".
nlohmann::json to_json(const RegimeReport& report);

std::vector<CheckRow> run_verify(VerifySelector selector);
void print_check_table(std::ostream& out, const std::vector<CheckRow>& rows);

}  // namespace zo::harness
