#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hfsurv/data.hpp"
#include "hfsurv/errors.hpp"

namespace hfsurv {

struct column_scale {
  std::string feature;
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
};

struct scaler_params {
  std::vector<column_scale> columns;

  const column_scale* find(std::string_view feature) const {
    for (const auto& c : columns)
      if (c.feature == feature) return &c;
    return nullptr;
  }
};

/// Standard-score parameters: mean and population standard deviation of
/// each listed feature.
inline scaler_params fit_scaler(const dataset& d, std::span<const std::string> features) {
  if (d.n_rows() == 0) throw empty_input_error("cannot fit scaler on an empty dataset");
  scaler_params p;
  const auto n = static_cast<double>(d.n_rows());
  for (const auto& name : features) {
    const auto& col = d.column(name);
    double sum = 0.0;
    for (double v : col) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    p.columns.push_back({name, mean, std::sqrt(ss / n)});
  }
  return p;
}

inline scaler_params fit_scaler(const dataset& d) {
  const auto names = d.feature_names();
  return fit_scaler(d, names);
}

/// z = (x - mean) / stddev for every covered feature. A zero-variance
/// column maps to all zeros. Uncovered features and the target are copied.
inline dataset apply_scaler(dataset d, const scaler_params& p) {
  for (const auto& c : p.columns) {
    auto& col = d.columns[d.require_index(c.feature)];
    for (double& v : col) v = c.stddev > 0.0 ? (v - c.mean) / c.stddev : 0.0;
  }
  return d;
}

inline dataset inverse_scaler(dataset d, const scaler_params& p) {
  for (const auto& c : p.columns) {
    auto& col = d.columns[d.require_index(c.feature)];
    for (double& v : col) v = v * c.stddev + c.mean;
  }
  return d;
}

}  // namespace hfsurv
