// SPDX-License-Identifier: Apache-2.0
#include "zo/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "zo/errors.hpp"

namespace zo {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("failed to format double");
  return std::string(buf.data(), end);
}

void write_csv(std::ostream& out, const Dataset& data) {
  const Eigen::Index p = data.features.cols();
  for (Eigen::Index j = 0; j < p; ++j) out << 'f' << j << ',';
  out << "label\n";
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << format_double(data.features(i, j)) << ',';
    out << data.labels[i] << '\n';
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_csv(out, data);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_number(const std::string& cell, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(line, "bad number '" + cell + "'");
  }
  return value;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "label") {
    throw ParseError(1, "header must end with 'label'");
  }
  const std::size_t p = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != p + 1) throw ParseError(line_no, "wrong number of columns");
    for (std::size_t j = 0; j < p; ++j) values.push_back(parse_number<double>(cells[j], line_no));
    labels.push_back(parse_number<int>(cells[p], line_no));
  }

  Dataset data;
  const auto n = static_cast<Eigen::Index>(labels.size());
  data.features.resize(n, static_cast<Eigen::Index>(p));
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
      data.features(i, j) = values[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
    }
    data.labels[i] = labels[static_cast<std::size_t>(i)];
  }
  return data;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_csv(in);
}

}  // namespace zo
