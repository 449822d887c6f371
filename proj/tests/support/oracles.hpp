#pragma once

// Brute-force reference computations used by the tests. These deliberately
// avoid the library's code paths: the stump enumerator scans every
// (feature, midpoint) pair directly, the AUC oracle counts concordant
// positive/negative pairs.

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

namespace hfsurv::testkit {

struct stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

inline double oracle_impurity(double m0, double m1, bool entropy) {
  const double n = m0 + m1;
  if (n <= 0.0) return 0.0;
  const double p0 = m0 / n, p1 = m1 / n;
  if (!entropy) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log(p0) / std::log(2.0);
  if (p1 > 0.0) h -= p1 * std::log(p1) / std::log(2.0);
  return h;
}

/// Best single split by exhaustive enumeration. Ties (within 1e-12) keep
/// the lowest feature, then the lowest threshold.
inline std::optional<stump> best_stump(const std::vector<std::vector<double>>& columns,
                                       const std::vector<int>& labels, double w0 = 1.0,
                                       double w1 = 1.0, bool entropy = false) {
  constexpr double tol = 1e-12;
  double p0 = 0.0, p1 = 0.0;
  for (int y : labels) (y == 1 ? p1 : p0) += (y == 1 ? w1 : w0);
  const double parent = oracle_impurity(p0, p1, entropy);
  std::optional<stump> best;
  for (std::size_t f = 0; f < columns.size(); ++f) {
    const std::set<double> distinct(columns[f].begin(), columns[f].end());
    std::vector<double> values(distinct.begin(), distinct.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double t = (values[k] + values[k + 1]) / 2.0;
      if (t >= values[k + 1]) t = values[k];
      double l0 = 0.0, l1 = 0.0, r0 = 0.0, r1 = 0.0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool left = columns[f][i] <= t;
        if (labels[i] == 1) (left ? l1 : r1) += w1;
        else (left ? l0 : r0) += w0;
      }
      const double m = p0 + p1;
      const double d = parent - (l0 + l1) / m * oracle_impurity(l0, l1, entropy) -
                       (r0 + r1) / m * oracle_impurity(r0, r1, entropy);
      if (d <= tol) continue;
      if (!best || d > best->decrease + tol) best = stump{f, t, d};
    }
  }
  return best;
}

/// P(score_pos > score_neg) + 0.5 P(score_pos == score_neg) over all pairs.
inline double concordance_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  double concordant = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) concordant += 1.0;
      else if (scores[i] == scores[j]) concordant += 0.5;
    }
  }
  return concordant / pairs;
}

}  // namespace hfsurv::testkit
