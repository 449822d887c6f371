#pragma once

// Binary-classification evaluation. The positive class is label 1.
// Everything is computed in fractional units; percent rendering is a
// display concern.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/errors.hpp"

namespace hfsurv {

struct confusion_matrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const confusion_matrix&, const confusion_matrix&) = default;
};

namespace detail {
template <typename A, typename B>
void check_pair_lengths(std::span<A> actual, std::span<B> predicted) {
  if (actual.size() != predicted.size())
    throw data_error("length mismatch: " + std::to_string(actual.size()) + " actual vs " +
                     std::to_string(predicted.size()) + " predicted");
  if (actual.empty()) throw empty_input_error("no predictions to evaluate");
}
}  // namespace detail

inline confusion_matrix make_confusion_matrix(std::span<const int> actual,
                                              std::span<const int> predicted) {
  detail::check_pair_lengths(actual, predicted);
  confusion_matrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const int a = actual[i], p = predicted[i];
    if ((a != 0 && a != 1) || (p != 0 && p != 1)) throw data_error("labels must be 0 or 1");
    if (a == 1) {
      p == 1 ? ++cm.tp : ++cm.fn;
    } else {
      p == 1 ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

/// Mean squared difference between two sequences.
template <typename T>
double mse(std::span<const T> actual, std::span<const T> predicted) {
  detail::check_pair_lengths(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = static_cast<double>(actual[i]) - static_cast<double>(predicted[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(actual.size());
}

/// (1 + TPR - FPR) / 2, the area under the single-threshold ROC curve.
inline double roc_auc_point(const confusion_matrix& cm) {
  if (cm.tp + cm.fn == 0 || cm.fp + cm.tn == 0)
    throw degenerate_class_error("point ROC-AUC needs both classes in the ground truth");
  const double tpr = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  const double fpr = static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
  return (1.0 + tpr - fpr) / 2.0;
}

inline double gini_metric(double auc) noexcept { return 2.0 * auc - 1.0; }

/// A ratio whose denominator may vanish. `value` is 0 when undefined.
struct ratio {
  double value = 0.0;
  bool defined = true;
};

namespace detail {
inline ratio safe_ratio(double num, double den) {
  if (den == 0.0) return {0.0, false};
  return {num / den, true};
}
}  // namespace detail

/// Cohen's kappa, (P0 - Pe) / (1 - Pe).
inline ratio kappa(const confusion_matrix& cm) {
  const auto n = static_cast<double>(cm.total());
  if (n == 0.0) return {0.0, false};
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  const double p0 = (tp + tn) / n;
  const double pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
  if (pe == 1.0) return {0.0, false};
  return {(p0 - pe) / (1.0 - pe), true};
}

/// Matthews correlation coefficient; undefined when any marginal is zero.
inline ratio mcc(const confusion_matrix& cm) {
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  const double radicand = (tp + fp) * (tp + fn) * (tn + fn) * (tn + fp);
  if (radicand == 0.0) return {0.0, false};
  return {(tp * tn - fp * fn) / std::sqrt(radicand), true};
}

struct metrics_report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double mse = 0.0;
  double gini = 0.0;
  double kappa = 0.0;
  double mcc = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  std::vector<std::string> undefined;  // metrics whose denominator vanished (value reported as 0)

  bool is_defined(std::string_view name) const {
    return std::find(undefined.begin(), undefined.end(), name) == undefined.end();
  }

  /// (name, value) pairs in reporting order.
  std::vector<std::pair<std::string, double>> values() const {
    return {{"precision", precision}, {"recall", recall},   {"f1", f1},
            {"roc_auc", roc_auc},     {"mse", mse},         {"gini", gini},
            {"kappa", kappa},         {"mcc", mcc},         {"specificity", specificity},
            {"accuracy", accuracy}};
  }
};

/// Precision, recall, F1, specificity and accuracy.
inline metrics_report classification_report(const confusion_matrix& cm) {
  metrics_report r;
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  auto record = [&r](const char* name, ratio q) {
    if (!q.defined) r.undefined.emplace_back(name);
    return q.value;
  };
  const ratio precision = detail::safe_ratio(tp, tp + fp);
  const ratio recall = detail::safe_ratio(tp, tp + fn);
  r.precision = record("precision", precision);
  r.recall = record("recall", recall);
  ratio f1{0.0, false};
  if (precision.defined && recall.defined)
    f1 = detail::safe_ratio(2.0 * precision.value * recall.value, precision.value + recall.value);
  r.f1 = record("f1", f1);
  r.specificity = record("specificity", detail::safe_ratio(tn, tn + fp));
  r.accuracy = record("accuracy", detail::safe_ratio(tp + tn, tp + fp + fn + tn));
  return r;
}

/// All ten metrics for hard 0/1 predictions summarized by `cm`.
inline metrics_report evaluate_confusion(const confusion_matrix& cm) {
  metrics_report r = classification_report(cm);
  const auto n = static_cast<double>(cm.total());
  r.mse = n > 0.0 ? static_cast<double>(cm.fp + cm.fn) / n : 0.0;
  if (n == 0.0) r.undefined.emplace_back("mse");
  if (cm.tp + cm.fn > 0 && cm.fp + cm.tn > 0) {
    r.roc_auc = roc_auc_point(cm);
    r.gini = gini_metric(r.roc_auc);
  } else {
    r.undefined.emplace_back("roc_auc");
    r.undefined.emplace_back("gini");
  }
  const ratio k = kappa(cm);
  r.kappa = k.value;
  if (!k.defined) r.undefined.emplace_back("kappa");
  const ratio m = mcc(cm);
  r.mcc = m.value;
  if (!m.defined) r.undefined.emplace_back("mcc");
  return r;
}

/// Value of a named metric, for model selection.
inline double metric_value(const metrics_report& r, std::string_view name) {
  for (const auto& [n, v] : r.values())
    if (n == name) return v;
  if (name == "neg_mse") return -r.mse;
  throw config_error("unknown metric '" + std::string(name) + "'");
}

inline bool is_known_metric(std::string_view name) {
  static const metrics_report probe;
  for (const auto& [n, v] : probe.values())
    if (n == name) return true;
  return name == "neg_mse";
}

struct roc_point {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = std::numeric_limits<double>::infinity();  // score >= threshold predicts 1
};

struct roc_curve {
  std::vector<roc_point> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;               // trapezoidal
};

/// ROC curve over every distinct score, highest first. The trapezoidal
/// area is accumulated in integer units (twice the concordant-pair count)
/// so it equals the Mann-Whitney statistic with ties counted as one half.
inline roc_curve make_roc_curve(std::span<const int> actual, std::span<const double> scores) {
  detail::check_pair_lengths(actual, scores);
  std::size_t pos = 0;
  for (int y : actual) {
    if (y != 0 && y != 1) throw data_error("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = actual.size() - pos;
  if (pos == 0 || neg == 0) throw degenerate_class_error("ROC curve needs both classes");

  std::vector<std::size_t> order(actual.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  });

  roc_curve curve;
  curve.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, twice_area = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::uint64_t dtp = 0, dfp = 0;
    for (; k < order.size() && scores[order[k]] == s; ++k) (actual[order[k]] == 1 ? dtp : dfp) += 1;
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  curve.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

// ---- JSON / CSV -------------------------------------------------------------

inline nlohmann::ordered_json to_json(const confusion_matrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

inline double percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

/// Each metric as {"value": fraction, "percent": 100 * fraction to 2 dp}.
inline nlohmann::ordered_json to_json(const metrics_report& r) {
  nlohmann::ordered_json metrics;
  for (const auto& [name, value] : r.values())
    metrics[name] = {{"value", value}, {"percent", percent(value)}, {"defined", r.is_defined(name)}};
  return metrics;
}

inline nlohmann::ordered_json to_json(const roc_curve& c) {
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"fpr", p.fpr},
                   {"tpr", p.tpr},
                   {"threshold", std::isinf(p.threshold) ? nlohmann::ordered_json(nullptr)
                                                         : nlohmann::ordered_json(p.threshold)}});
  }
  return {{"auc", c.auc}, {"points", std::move(pts)}};
}

inline std::string roc_csv(const roc_curve& c) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : c.points) {
    out += nlohmann::json(p.fpr).dump() + "," + nlohmann::json(p.tpr).dump() + ",";
    out += std::isinf(p.threshold) ? "inf" : nlohmann::json(p.threshold).dump();
    out += "\n";
  }
  return out;
}

}  // namespace hfsurv
