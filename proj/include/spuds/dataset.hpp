// CSV loading and validation of numeric datasets with optional integer
// ground-truth labels.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "spuds/common.hpp"

namespace spuds {

// n x d matrix of finite reals, one row per observation.
struct DataMatrix {
  RowMatrixXd values;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }

  void validate() const {
    if (values.rows() < 2) throw EmptyData("DataMatrix requires n >= 2");
    if (values.cols() < 1) throw EmptyData("DataMatrix requires d >= 1");
    if (!values.allFinite()) throw ParseError("DataMatrix contains non-finite entries");
  }
};

// Class ids 0..k-1, one per observation.
struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

// Relabels to 0..K-1 in order of first appearance.
inline LabelVector canonicalize_labels(const std::vector<long long>& raw) {
  LabelVector out;
  out.labels.reserve(raw.size());
  std::unordered_map<long long, int> ids;
  for (long long v : raw) {
    auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
    out.labels.push_back(it->second);
  }
  out.num_classes = static_cast<int>(ids.size());
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const std::string_view t = trim(cell);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || t.empty() || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-numeric or non-finite cell at row " << (row + 1) << ", column " << (col + 1);
    throw ParseError(msg.str());
  }
  return value;
}

}  // namespace detail

// Reads a comma-delimited numeric file. `label_column` (0-based) strips that
// column from the features and returns it as canonicalized labels; the label
// cells must hold non-negative integers. Row/column indices in errors are
// 1-based and count data rows (the header, when present, is excluded).
inline std::pair<DataMatrix, std::optional<LabelVector>> load_csv(
    const std::string& path, std::optional<int> label_column = std::nullopt,
    bool has_header = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<long long> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_row = 0;
  std::size_t expected_fields = 0;  // raw width of the first data row
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (detail::trim(line).empty()) continue;

    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell(line.data() + start,
                                  (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(detail::parse_cell(cell, data_row, col));
      ++col;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    if (rows.empty()) {
      expected_fields = row.size();
    } else if (row.size() != expected_fields) {
      std::ostringstream msg;
      msg << "ragged row " << (data_row + 1) << ": expected " << expected_fields
          << " fields, got " << row.size();
      throw DimensionMismatch(msg.str());
    }

    if (label_column) {
      const int lc = *label_column;
      if (lc < 0 || lc >= static_cast<int>(row.size())) {
        std::ostringstream msg;
        msg << "label column " << lc << " out of range for row with " << row.size() << " fields";
        throw DimensionMismatch(msg.str());
      }
      const double lv = row[lc];
      if (lv < 0.0 || lv != std::floor(lv)) {
        std::ostringstream msg;
        msg << "label at row " << (data_row + 1) << " is not a non-negative integer";
        throw ParseError(msg.str());
      }
      raw_labels.push_back(static_cast<long long>(lv));
      row.erase(row.begin() + lc);
    }
    rows.push_back(std::move(row));
    ++data_row;
  }

  if (rows.size() < 2) throw EmptyData("need at least 2 data rows, got " + std::to_string(rows.size()));
  if (rows.front().empty()) throw EmptyData("no feature columns");

  DataMatrix X;
  X.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < X.values.rows(); ++i)
    for (Eigen::Index j = 0; j < X.values.cols(); ++j)
      X.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  X.validate();

  std::optional<LabelVector> labels;
  if (label_column) labels = canonicalize_labels(raw_labels);
  return {std::move(X), std::move(labels)};
}

// Label files for the nmi subcommand: one integer per line.
inline std::vector<long long> load_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<long long> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    ++row;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
      throw ParseError("bad label on line " + std::to_string(row) + " of " + path);
    out.push_back(v);
  }
  return out;
}

}  // namespace spuds
