#pragma once

// Exploratory summary: class balance, per-feature histograms and the
// Pearson correlation matrix over every feature plus the target.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/data.hpp"
#include "hfsurv/errors.hpp"

namespace hfsurv {

struct histogram {
  std::string feature;
  std::vector<double> edges;        // bins + 1 ascending edges
  std::vector<std::size_t> counts;  // bins entries
};

struct eda_summary {
  std::size_t n_rows = 0;
  std::array<double, 2> class_proportions{};
  std::vector<histogram> histograms;
  std::vector<std::string> correlation_columns;
  std::vector<std::vector<double>> correlation;
};

/// Pearson correlation. Returns 0 when either input has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Equal-width bins over [min, max]; the maximum lands in the last bin.
inline histogram make_histogram(std::string feature, std::span<const double> values,
                                std::size_t bins) {
  histogram h{std::move(feature), {}, std::vector<std::size_t>(bins, 0)};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = values.empty() ? 0.0 : *lo_it;
  const double hi = values.empty() ? 0.0 : *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

inline eda_summary eda_summarize(const dataset& d, std::size_t bins = 10) {
  if (bins < 1) throw config_error("histogram needs at least one bin");
  if (d.n_rows() == 0) throw empty_input_error("cannot summarize an empty dataset");
  eda_summary s;
  s.n_rows = d.n_rows();
  const auto counts = d.class_counts();
  const auto n = static_cast<double>(d.n_rows());
  s.class_proportions = {static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n};

  for (std::size_t j = 0; j < d.n_features(); ++j)
    if (d.schema[j].kind == feature_kind::continuous)
      s.histograms.push_back(make_histogram(d.schema[j].name, d.columns[j], bins));

  std::vector<std::vector<double>> cols = d.columns;
  cols.emplace_back(d.target.begin(), d.target.end());
  s.correlation_columns = d.feature_names();
  s.correlation_columns.emplace_back(target_column);
  const std::size_t m = cols.size();
  s.correlation.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    s.correlation[a][a] = 1.0;
    for (std::size_t b = a + 1; b < m; ++b) {
      const double r = pearson(cols[a], cols[b]);
      s.correlation[a][b] = r;
      s.correlation[b][a] = r;
    }
  }
  return s;
}

inline nlohmann::ordered_json to_json(const eda_summary& s) {
  nlohmann::ordered_json j;
  j["n_rows"] = s.n_rows;
  j["class_proportions"] = {{"0", s.class_proportions[0]}, {"1", s.class_proportions[1]}};
  auto hs = nlohmann::ordered_json::array();
  for (const auto& h : s.histograms)
    hs.push_back({{"feature", h.feature}, {"edges", h.edges}, {"counts", h.counts}});
  j["histograms"] = std::move(hs);
  j["correlation"] = {{"columns", s.correlation_columns}, {"matrix", s.correlation}};
  return j;
}

/// Correlation matrix as CSV with a header row and a leading name column.
inline std::string correlation_csv(const eda_summary& s) {
  std::string out = "column";
  for (const auto& c : s.correlation_columns) out += "," + c;
  out += "\n";
  for (std::size_t a = 0; a < s.correlation.size(); ++a) {
    out += s.correlation_columns[a];
    for (double r : s.correlation[a]) out += "," + nlohmann::json(r).dump();
    out += "\n";
  }
  return out;
}

}  // namespace hfsurv
