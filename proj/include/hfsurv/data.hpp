#pragma once

// Heart-failure clinical records: schema, column-oriented dataset,
// CSV loading and range validation.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hfsurv/errors.hpp"

namespace hfsurv {

enum class feature_kind { continuous, boolean };

struct feature_schema {
  std::string name;
  feature_kind kind = feature_kind::continuous;
  double lo = 0.0;  // inclusive valid range
  double hi = 0.0;
  std::string unit;
};

inline constexpr std::string_view target_column = "DEATH_EVENT";

/// The twelve clinical features in UCI distribution order. Ranges are in
/// the units the CSV stores (platelets are per mL, not kiloplatelets).
inline const std::vector<feature_schema>& heart_failure_schema() {
  using enum feature_kind;
  static const std::vector<feature_schema> schema{
      {"age", continuous, 40.0, 95.0, "years"},
      {"anaemia", boolean, 0.0, 1.0, "boolean"},
      {"creatinine_phosphokinase", continuous, 23.0, 7861.0, "mcg/L"},
      {"diabetes", boolean, 0.0, 1.0, "boolean"},
      {"ejection_fraction", continuous, 14.0, 80.0, "percentage"},
      {"high_blood_pressure", boolean, 0.0, 1.0, "boolean"},
      {"platelets", continuous, 25010.0, 850000.0, "platelets/mL"},
      {"serum_creatinine", continuous, 0.5, 9.4, "mg/dL"},
      {"serum_sodium", continuous, 113.0, 148.0, "mEq/L"},
      {"sex", boolean, 0.0, 1.0, "boolean"},
      {"smoking", boolean, 0.0, 1.0, "boolean"},
      {"time", continuous, 4.0, 285.0, "days"},
  };
  return schema;
}

inline std::vector<std::string> heart_failure_header() {
  std::vector<std::string> names;
  for (const auto& f : heart_failure_schema()) names.push_back(f.name);
  names.emplace_back(target_column);
  return names;
}

/// Column-oriented table with a binary target. `columns[j]` holds feature
/// `schema[j]`; every column and the target have n_rows() entries.
struct dataset {
  std::vector<feature_schema> schema;
  std::vector<std::vector<double>> columns;
  std::vector<int> target;

  std::size_t n_rows() const noexcept { return target.size(); }
  std::size_t n_features() const noexcept { return schema.size(); }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    names.reserve(schema.size());
    for (const auto& f : schema) names.push_back(f.name);
    return names;
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t j = 0; j < schema.size(); ++j)
      if (schema[j].name == name) return j;
    return std::nullopt;
  }

  std::size_t require_index(std::string_view name) const {
    if (auto j = index_of(name)) return *j;
    throw schema_error("unknown feature '" + std::string(name) + "'");
  }

  const std::vector<double>& column(std::string_view name) const {
    return columns[require_index(name)];
  }

  std::vector<double> row(std::size_t i) const {
    std::vector<double> out(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j][i];
    return out;
  }

  std::array<std::size_t, 2> class_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (int y : target) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  /// Keeps the named features, in the order given.
  dataset select_features(std::span<const std::string> names) const {
    dataset out;
    out.target = target;
    for (const auto& name : names) {
      const std::size_t j = require_index(name);
      out.schema.push_back(schema[j]);
      out.columns.push_back(columns[j]);
    }
    return out;
  }

  dataset take_rows(std::span<const std::size_t> rows) const {
    dataset out;
    out.schema = schema;
    out.columns.resize(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.columns[j].reserve(rows.size());
      for (std::size_t i : rows) out.columns[j].push_back(columns[j][i]);
    }
    out.target.reserve(rows.size());
    for (std::size_t i : rows) out.target.push_back(target[i]);
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  for (;;) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

inline bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace detail

/// Parses the clinical-records CSV. The header must name exactly the twelve
/// features plus DEATH_EVENT; columns may appear in any order and are
/// returned in schema order.
inline dataset parse_dataset(std::istream& in) {
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!detail::is_blank(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw empty_input_error("empty input: no header row");

  const auto expected = heart_failure_header();
  const auto header_fields = detail::split_csv_line(line);
  std::vector<std::size_t> position(expected.size(), SIZE_MAX);  // expected col -> field index
  for (std::size_t k = 0; k < header_fields.size(); ++k) {
    const auto it = std::find(expected.begin(), expected.end(), header_fields[k]);
    if (it == expected.end())
      throw schema_error("unexpected column '" + std::string(header_fields[k]) + "'");
    auto& slot = position[static_cast<std::size_t>(it - expected.begin())];
    if (slot != SIZE_MAX) throw schema_error("duplicate column '" + *it + "'");
    slot = k;
  }
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (position[c] == SIZE_MAX) throw schema_error("missing column '" + expected[c] + "'");

  dataset d;
  d.schema = heart_failure_schema();
  d.columns.resize(d.schema.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    ++row;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header_fields.size())
      throw parse_error(row, "", "expected " + std::to_string(header_fields.size()) +
                                     " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < expected.size(); ++c) {
      const std::string_view cell = fields[position[c]];
      if (cell.empty()) throw parse_error(row, expected[c], "missing value");
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || end != cell.data() + cell.size())
        throw parse_error(row, expected[c], "not a number: '" + std::string(cell) + "'");
      if (c < d.schema.size()) {
        d.columns[c].push_back(v);
      } else {
        if (v != 0.0 && v != 1.0) throw parse_error(row, expected[c], "target must be 0 or 1");
        d.target.push_back(static_cast<int>(v));
      }
    }
  }
  if (row == 0) throw empty_input_error("empty input: header but no data rows");
  return d;
}

inline dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in);
}

inline dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in);
}

struct violation {
  std::size_t row = 0;  // 0-based data row
  std::string feature;
  double value = 0.0;
  std::string message;
};

/// One record per (row, feature) outside the schema range, or outside
/// {0, 1} for boolean features.
inline std::vector<violation> validate_dataset(const dataset& d) {
  std::vector<violation> out;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t j = 0; j < d.n_features(); ++j) {
      const auto& f = d.schema[j];
      const double v = d.columns[j][i];
      if (f.kind == feature_kind::boolean) {
        if (v != 0.0 && v != 1.0)
          out.push_back({i, f.name, v, f.name + " must be boolean (0 or 1)"});
      } else if (!(v >= f.lo && v <= f.hi)) {
        std::ostringstream msg;
        msg << f.name << " outside valid range [" << f.lo << ", " << f.hi << "]";
        out.push_back({i, f.name, v, msg.str()});
      }
    }
  }
  return out;
}

}  // namespace hfsurv
