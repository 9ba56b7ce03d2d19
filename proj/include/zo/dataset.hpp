// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace zo {

/// Dense labeled dataset: one row per sample, integer class labels.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;
};

/// CSV layout: header `f0,...,f{p-1},label`, one sample per row. Features
/// are written in shortest round-trip decimal form so a reader recovers the
/// exact doubles.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace zo
