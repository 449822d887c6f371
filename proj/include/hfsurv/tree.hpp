#pragma once

// Binary-classification CART trees.
//
// Splits are axis-aligned `x[feature] <= threshold` tests chosen to maximize
// the class-weighted impurity decrease
//
//   decrease = I(parent) - (m_L / m) * I(left) - (m_R / m) * I(right)
//
// where m is the class-weighted sample mass. Two search modes exist:
// exhaustive (every midpoint between consecutive distinct values) and
// random (one uniform threshold per candidate feature, as in Extra-Trees).
//
// Trees grow best-first: the frontier leaf whose split removes the most
// weighted impurity, (m_node / m_root) * decrease, is expanded next, so a
// max_leaf_nodes budget keeps the most useful splits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/errors.hpp"
#include "hfsurv/random.hpp"

namespace hfsurv {

enum class split_criterion { gini, entropy };
enum class split_mode { exhaustive, random };
enum class class_weight_mode { none, balanced };

/// Two decreases closer than this are a tie; a split must beat zero by
/// more than this to count as an improvement.
inline constexpr double decrease_tolerance = 1e-12;

inline double gini_impurity(std::array<double, 2> p) noexcept {
  return p[0] * (1.0 - p[0]) + p[1] * (1.0 - p[1]);
}

/// Shannon entropy in bits, with 0 * log(0) = 0.
inline double entropy_impurity(std::array<double, 2> p) noexcept {
  double h = 0.0;
  for (double q : p)
    if (q > 0.0) h -= q * std::log2(q);
  return h;
}

/// Impurity of a node holding the given class masses.
inline double node_impurity(split_criterion c, std::array<double, 2> mass) noexcept {
  const double total = mass[0] + mass[1];
  if (total <= 0.0) return 0.0;
  const std::array<double, 2> p{mass[0] / total, mass[1] / total};
  return c == split_criterion::gini ? gini_impurity(p) : entropy_impurity(p);
}

struct class_weights {
  std::array<double, 2> w{1.0, 1.0};
};

/// w_c = n / (2 * n_c).
inline class_weights balanced_class_weights(std::array<std::size_t, 2> counts) {
  if (counts[0] == 0 || counts[1] == 0)
    throw degenerate_class_error("balanced class weights need both classes present");
  const auto n = static_cast<double>(counts[0] + counts[1]);
  return {{n / (2.0 * static_cast<double>(counts[0])), n / (2.0 * static_cast<double>(counts[1]))}};
}

struct tree_config {
  split_criterion criterion = split_criterion::gini;
  std::optional<std::size_t> max_depth;       // unlimited when empty
  std::optional<double> min_samples_split;    // fraction of root samples; 2 samples when empty
  std::optional<std::size_t> max_leaf_nodes;  // unlimited when empty
  class_weight_mode class_weight = class_weight_mode::none;
  split_mode mode = split_mode::exhaustive;
  std::optional<std::size_t> max_features;    // all features when empty
  std::uint64_t seed = 0;

  friend bool operator==(const tree_config&, const tree_config&) = default;
};

inline void validate(const tree_config& c) {
  if (c.max_depth && *c.max_depth < 1) throw config_error("max_depth must be at least 1");
  if (c.min_samples_split && !(*c.min_samples_split > 0.0 && *c.min_samples_split <= 1.0))
    throw config_error("min_samples_split must be a fraction in (0, 1]");
  if (c.max_leaf_nodes && *c.max_leaf_nodes < 2)
    throw config_error("max_leaf_nodes must be at least 2, got " +
                       std::to_string(*c.max_leaf_nodes));
  if (c.max_features && *c.max_features < 1) throw config_error("max_features must be at least 1");
}

/// Absolute sample threshold for splitting: ceil(fraction * n_root), at least 2.
inline std::size_t min_samples_split_count(const tree_config& c, std::size_t n_root) {
  if (!c.min_samples_split) return 2;
  const auto k = static_cast<std::size_t>(std::ceil(*c.min_samples_split * static_cast<double>(n_root)));
  return std::max<std::size_t>(2, k);
}

struct split_candidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

/// Read-only training data for split search: column-major features and
/// labels, addressed by row index.
struct training_view {
  std::span<const std::vector<double>> columns;
  std::span<const int> labels;
  class_weights weights;
  split_criterion criterion = split_criterion::gini;

  std::array<double, 2> mass(std::span<const std::size_t> rows) const {
    std::array<double, 2> m{0.0, 0.0};
    for (std::size_t i : rows) {
      const auto y = static_cast<std::size_t>(labels[i]);
      m[y] += weights.w[y];
    }
    return m;
  }

  double decrease(std::array<double, 2> parent, std::array<double, 2> left) const {
    const std::array<double, 2> right{parent[0] - left[0], parent[1] - left[1]};
    const double m = parent[0] + parent[1];
    const double ml = left[0] + left[1];
    const double mr = right[0] + right[1];
    return node_impurity(criterion, parent) - (ml / m) * node_impurity(criterion, left) -
           (mr / m) * node_impurity(criterion, right);
  }
};

namespace detail {

inline void consider(std::optional<split_candidate>& best, split_candidate c) {
  if (c.decrease <= decrease_tolerance) return;
  if (!best || c.decrease > best->decrease + decrease_tolerance) best = c;
}

inline double midpoint(double a, double b) {
  double t = (a + b) / 2.0;
  if (t >= b || !std::isfinite(t)) t = a;
  return t;
}

}  // namespace detail

/// Best split of `rows` among the candidate features, or nothing when no
/// split reduces impurity. Ties go to the lowest feature index, then the
/// lowest threshold.
inline std::optional<split_candidate> find_best_split(const training_view& data,
                                                      std::span<const std::size_t> rows,
                                                      std::span<const std::size_t> features,
                                                      split_mode mode, rng& gen) {
  std::optional<split_candidate> best;
  if (rows.size() < 2 || features.empty()) return best;
  const auto parent = data.mass(rows);
  if (node_impurity(data.criterion, parent) <= decrease_tolerance) return best;

  std::vector<std::size_t> order(features.begin(), features.end());
  std::sort(order.begin(), order.end());

  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  for (std::size_t f : order) {
    const auto& x = data.columns[f];
    if (mode == split_mode::exhaustive) {
      std::sort(sorted.begin(), sorted.end(), [&x](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && a < b);
      });
      std::array<double, 2> left{0.0, 0.0};
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const auto y = static_cast<std::size_t>(data.labels[sorted[k]]);
        left[y] += data.weights.w[y];
        const double a = x[sorted[k]], b = x[sorted[k + 1]];
        if (!(a < b)) continue;
        detail::consider(best, {f, detail::midpoint(a, b), data.decrease(parent, left)});
      }
    } else {
      const auto [lo_it, hi_it] = std::minmax_element(
          rows.begin(), rows.end(), [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
      const double lo = x[*lo_it], hi = x[*hi_it];
      if (!(std::nextafter(lo, hi) < hi)) continue;
      const double t = gen.uniform_open(lo, hi);
      std::array<double, 2> left{0.0, 0.0};
      for (std::size_t i : rows)
        if (x[i] <= t) {
          const auto y = static_cast<std::size_t>(data.labels[i]);
          left[y] += data.weights.w[y];
        }
      detail::consider(best, {f, t, data.decrease(parent, left)});
    }
  }
  return best;
}

struct internal_node {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double impurity_decrease = 0.0;  // unweighted decrease at this node
  double weighted_fraction = 0.0;  // node mass / root mass
  friend bool operator==(const internal_node&, const internal_node&) = default;
};

struct leaf_node {
  std::array<double, 2> proba{1.0, 0.0};
  friend bool operator==(const leaf_node&, const leaf_node&) = default;
};

using tree_node = std::variant<internal_node, leaf_node>;

class decision_tree {
public:
  decision_tree() = default;

  /// Assembles a tree from its node arena (node 0 is the root). Throws
  /// config_error if child links or feature indices are out of range.
  decision_tree(std::vector<tree_node> nodes, std::size_t n_features, tree_config config)
      : nodes_(std::move(nodes)), n_features_(n_features), config_(std::move(config)) {
    if (nodes_.empty()) throw config_error("tree has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (const auto* in = std::get_if<internal_node>(&nodes_[i])) {
        if (in->left <= i || in->right <= i || in->left >= nodes_.size() ||
            in->right >= nodes_.size() || in->feature >= n_features_)
          throw config_error("malformed tree node " + std::to_string(i));
      }
    }
    depth_ = measure_depth(0);
  }

  const std::vector<tree_node>& nodes() const noexcept { return nodes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t depth() const noexcept { return depth_; }
  const tree_config& config() const noexcept { return config_; }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) {
      return std::holds_alternative<leaf_node>(n);
    }));
  }

  /// Values <= threshold route left.
  std::array<double, 2> predict_proba(std::span<const double> row) const {
    std::size_t i = 0;
    for (;;) {
      const auto& node = nodes_[i];
      if (const auto* leaf = std::get_if<leaf_node>(&node)) return leaf->proba;
      const auto& in = std::get<internal_node>(node);
      i = row[in.feature] <= in.threshold ? in.left : in.right;
    }
  }

  /// Mean-decrease-in-impurity: sum of weighted_fraction * impurity_decrease
  /// over the splits on each feature. Not normalized.
  std::vector<double> feature_importance() const {
    std::vector<double> imp(n_features_, 0.0);
    for (const auto& node : nodes_)
      if (const auto* in = std::get_if<internal_node>(&node))
        imp[in->feature] += in->weighted_fraction * in->impurity_decrease;
    return imp;
  }

  friend bool operator==(const decision_tree&, const decision_tree&) = default;

private:
  std::size_t measure_depth(std::size_t i) const {
    if (const auto* in = std::get_if<internal_node>(&nodes_[i]))
      return 1 + std::max(measure_depth(in->left), measure_depth(in->right));
    return 0;
  }

  std::vector<tree_node> nodes_{leaf_node{}};
  std::size_t n_features_ = 0;
  std::size_t depth_ = 0;
  tree_config config_;
};

/// Fits a tree on `rows` (indices into the columns; repeats allowed, which
/// is how bootstrap samples are expressed). Deterministic in config.seed.
inline decision_tree fit_tree(std::span<const std::vector<double>> columns,
                              std::span<const int> labels, std::span<const std::size_t> rows,
                              const tree_config& config) {
  validate(config);
  if (rows.empty()) throw empty_input_error("cannot fit a tree on zero rows");
  const std::size_t n_features = columns.size();
  if (n_features == 0) throw config_error("cannot fit a tree without features");
  const std::size_t n_candidates = std::min(config.max_features.value_or(n_features), n_features);

  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t i : rows) {
    if (labels[i] != 0 && labels[i] != 1) throw data_error("labels must be 0 or 1");
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  training_view data{columns, labels, {}, config.criterion};
  // A single-class sample becomes a lone leaf whatever the weights are.
  if (config.class_weight == class_weight_mode::balanced && counts[0] > 0 && counts[1] > 0)
    data.weights = balanced_class_weights(counts);

  const std::size_t min_split = min_samples_split_count(config, rows.size());
  const std::size_t max_depth = config.max_depth.value_or(SIZE_MAX);
  const std::size_t max_leaves = config.max_leaf_nodes.value_or(SIZE_MAX);
  rng gen(config.seed);

  struct pending {
    std::size_t node;
    std::size_t depth;
    std::vector<std::size_t> rows;
    std::array<double, 2> mass;
    split_candidate split;
    double priority;
  };
  auto later = [](const pending& a, const pending& b) {
    return a.priority < b.priority || (a.priority == b.priority && a.node > b.node);
  };
  std::priority_queue<pending, std::vector<pending>, decltype(later)> frontier(later);

  std::vector<tree_node> nodes;
  const double root_mass = [&] {
    const auto m = data.mass(rows);
    return m[0] + m[1];
  }();

  auto make_node = [&](std::vector<std::size_t> node_rows, std::size_t depth) {
    const std::size_t id = nodes.size();
    const auto mass = data.mass(node_rows);
    const double total = mass[0] + mass[1];
    nodes.emplace_back(leaf_node{{mass[0] / total, mass[1] / total}});
    if (depth >= max_depth || node_rows.size() < min_split) return id;
    std::vector<std::size_t> features;
    if (n_candidates < n_features) {
      features = gen.sample_without_replacement(n_features, n_candidates);
    } else {
      features.resize(n_features);
      std::iota(features.begin(), features.end(), std::size_t{0});
    }
    if (auto split = find_best_split(data, node_rows, features, config.mode, gen)) {
      const double priority = (total / root_mass) * split->decrease;
      frontier.push({id, depth, std::move(node_rows), mass, *split, priority});
    }
    return id;
  };

  make_node(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  std::size_t leaves = 1;
  while (!frontier.empty() && leaves < max_leaves) {
    pending p = frontier.top();
    frontier.pop();
    std::vector<std::size_t> left_rows, right_rows;
    const auto& x = columns[p.split.feature];
    for (std::size_t i : p.rows) (x[i] <= p.split.threshold ? left_rows : right_rows).push_back(i);
    p.rows.clear();
    p.rows.shrink_to_fit();
    const std::size_t l = make_node(std::move(left_rows), p.depth + 1);
    const std::size_t r = make_node(std::move(right_rows), p.depth + 1);
    nodes[p.node] = internal_node{p.split.feature, p.split.threshold, l, r, p.split.decrease,
                                  (p.mass[0] + p.mass[1]) / root_mass};
    ++leaves;
  }
  return decision_tree(std::move(nodes), n_features, config);
}

/// Fits on every row.
inline decision_tree fit_tree(std::span<const std::vector<double>> columns,
                              std::span<const int> labels, const tree_config& config) {
  std::vector<std::size_t> rows(labels.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(columns, labels, rows, config);
}

// ---- names and JSON ---------------------------------------------------------

inline std::string_view to_string(split_criterion c) {
  return c == split_criterion::gini ? "gini" : "entropy";
}
inline std::string_view to_string(split_mode m) {
  return m == split_mode::exhaustive ? "exhaustive" : "random";
}
inline std::string_view to_string(class_weight_mode m) {
  return m == class_weight_mode::balanced ? "balanced" : "none";
}

/// "gini" or "entropy". An absent criterion ("None"/empty) means gini.
inline split_criterion parse_criterion(std::string_view s) {
  if (s == "gini" || s == "None" || s == "none" || s.empty()) return split_criterion::gini;
  if (s == "entropy") return split_criterion::entropy;
  throw config_error("unknown criterion '" + std::string(s) + "'");
}

inline split_mode parse_split_mode(std::string_view s) {
  if (s == "exhaustive") return split_mode::exhaustive;
  if (s == "random") return split_mode::random;
  throw config_error("unknown split mode '" + std::string(s) + "'");
}

inline class_weight_mode parse_class_weight(std::string_view s) {
  if (s == "balanced") return class_weight_mode::balanced;
  if (s == "none" || s == "None" || s.empty()) return class_weight_mode::none;
  throw config_error("unknown class weight '" + std::string(s) + "'");
}

namespace detail {
template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
template <typename T, typename Json>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).template get<T>();
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const tree_config& c) {
  return {{"criterion", to_string(c.criterion)},
          {"max_depth", detail::optional_json(c.max_depth)},
          {"min_samples_split", detail::optional_json(c.min_samples_split)},
          {"max_leaf_nodes", detail::optional_json(c.max_leaf_nodes)},
          {"class_weight", to_string(c.class_weight)},
          {"split_mode", to_string(c.mode)},
          {"max_features", detail::optional_json(c.max_features)},
          {"seed", c.seed}};
}

template <typename Json>
tree_config tree_config_from_json(const Json& j) {
  tree_config c;
  c.criterion = parse_criterion(j.at("criterion").template get<std::string>());
  c.max_depth = detail::optional_from<std::size_t>(j, "max_depth");
  c.min_samples_split = detail::optional_from<double>(j, "min_samples_split");
  c.max_leaf_nodes = detail::optional_from<std::size_t>(j, "max_leaf_nodes");
  c.class_weight = parse_class_weight(j.at("class_weight").template get<std::string>());
  c.mode = parse_split_mode(j.at("split_mode").template get<std::string>());
  c.max_features = detail::optional_from<std::size_t>(j, "max_features");
  c.seed = j.at("seed").template get<std::uint64_t>();
  return c;
}

inline nlohmann::ordered_json to_json(const decision_tree& t) {
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& node : t.nodes()) {
    if (const auto* leaf = std::get_if<leaf_node>(&node)) {
      nodes.push_back({{"proba", leaf->proba}});
    } else {
      const auto& in = std::get<internal_node>(node);
      nodes.push_back({{"feature", in.feature},
                       {"threshold", in.threshold},
                       {"left", in.left},
                       {"right", in.right},
                       {"impurity_decrease", in.impurity_decrease},
                       {"weighted_fraction", in.weighted_fraction}});
    }
  }
  return {{"n_features", t.n_features()}, {"config", to_json(t.config())}, {"nodes", nodes}};
}

template <typename Json>
decision_tree decision_tree_from_json(const Json& j) {
  std::vector<tree_node> nodes;
  for (const auto& n : j.at("nodes")) {
    if (n.contains("proba")) {
      nodes.emplace_back(leaf_node{n.at("proba").template get<std::array<double, 2>>()});
    } else {
      nodes.emplace_back(internal_node{n.at("feature").template get<std::size_t>(),
                                       n.at("threshold").template get<double>(),
                                       n.at("left").template get<std::size_t>(),
                                       n.at("right").template get<std::size_t>(),
                                       n.at("impurity_decrease").template get<double>(),
                                       n.at("weighted_fraction").template get<double>()});
    }
  }
  return decision_tree(std::move(nodes), j.at("n_features").template get<std::size_t>(),
                       tree_config_from_json(j.at("config")));
}

}  // namespace hfsurv
