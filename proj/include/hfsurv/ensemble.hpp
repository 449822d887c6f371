#pragma once

// Random Forests (bootstrap + exhaustive splits) and Extra-Trees (full
// sample + random thresholds). Tree i always uses seed
// derive_seed(master_seed, i), so the fitted forest does not depend on how
// many worker threads built it.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/errors.hpp"
#include "hfsurv/random.hpp"
#include "hfsurv/tree.hpp"

namespace hfsurv {

enum class forest_kind { random_forest, extra_trees };

inline std::string_view to_string(forest_kind k) {
  return k == forest_kind::random_forest ? "random_forest" : "extra_trees";
}

inline forest_kind parse_forest_kind(std::string_view s) {
  if (s == "random_forest") return forest_kind::random_forest;
  if (s == "extra_trees") return forest_kind::extra_trees;
  throw config_error("unknown forest kind '" + std::string(s) + "'");
}

struct forest_config {
  forest_kind kind = forest_kind::random_forest;
  std::size_t n_trees = 100;
  tree_config tree;  // tree.seed is ignored; per-tree seeds come from master_seed
  std::uint64_t master_seed = 0;

  bool bootstrap() const noexcept { return kind == forest_kind::random_forest; }

  friend bool operator==(const forest_config&, const forest_config&) = default;
};

/// floor(sqrt(n_features)), at least 1.
inline std::size_t default_max_features(std::size_t n_features) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))));
}

/// A config of the given kind with its split mode set accordingly and the
/// default feature subsampling for `n_features`.
inline forest_config make_forest_config(forest_kind kind, std::size_t n_features,
                                        std::uint64_t master_seed = 0) {
  forest_config c;
  c.kind = kind;
  c.master_seed = master_seed;
  c.tree.mode = kind == forest_kind::random_forest ? split_mode::exhaustive : split_mode::random;
  c.tree.max_features = default_max_features(n_features);
  return c;
}

inline std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index);
}

/// n draws with replacement from [0, n).
inline std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed) {
  rng gen(derive_seed(seed, 0xB0075742ULL));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = gen.below(n);
  return rows;
}

struct importance_ranking {
  std::vector<std::pair<std::string, double>> entries;  // descending importance

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.first);
    return out;
  }
};

class forest {
public:
  forest() = default;
  forest(std::vector<decision_tree> trees, forest_config config,
         std::vector<std::string> feature_names)
      : trees_(std::move(trees)), config_(std::move(config)), feature_names_(std::move(feature_names)) {
    if (trees_.empty()) throw config_error("forest has no trees");
    for (const auto& t : trees_)
      if (t.n_features() != feature_names_.size())
        throw config_error("tree feature count does not match the forest's feature names");
  }

  const std::vector<decision_tree>& trees() const noexcept { return trees_; }
  const forest_config& config() const noexcept { return config_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  std::size_t n_features() const noexcept { return feature_names_.size(); }

  /// Unweighted mean of the per-tree class probabilities.
  std::array<double, 2> predict_proba(std::span<const double> row) const {
    std::array<double, 2> sum{0.0, 0.0};
    for (const auto& t : trees_) {
      const auto p = t.predict_proba(row);
      sum[0] += p[0];
      sum[1] += p[1];
    }
    const auto n = static_cast<double>(trees_.size());
    return {sum[0] / n, sum[1] / n};
  }

  /// Label 1 when its probability is at least that of label 0, so an exact
  /// 0.5 tie predicts the positive class.
  int predict(std::span<const double> row) const {
    const auto p = predict_proba(row);
    return p[1] >= p[0] ? 1 : 0;
  }

  /// Mean of per-tree importances normalized to sum 1 (all zeros stay
  /// zero), sorted descending with ties broken by name.
  importance_ranking feature_importances() const {
    std::vector<double> mean(feature_names_.size(), 0.0);
    for (const auto& t : trees_) {
      const auto imp = t.feature_importance();
      for (std::size_t j = 0; j < imp.size(); ++j) mean[j] += imp[j];
    }
    double total = 0.0;
    for (double& v : mean) {
      v /= static_cast<double>(trees_.size());
      total += v;
    }
    importance_ranking r;
    for (std::size_t j = 0; j < mean.size(); ++j)
      r.entries.emplace_back(feature_names_[j], total > 0.0 ? mean[j] / total : 0.0);
    std::sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
      return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    return r;
  }

  friend bool operator==(const forest&, const forest&) = default;

private:
  std::vector<decision_tree> trees_;
  forest_config config_;
  std::vector<std::string> feature_names_;
};

/// Fits tree `index` of a forest exactly as fit_forest would.
inline decision_tree fit_forest_member(std::span<const std::vector<double>> columns,
                                       std::span<const int> labels, const forest_config& config,
                                       std::size_t index) {
  tree_config tc = config.tree;
  tc.mode = config.kind == forest_kind::random_forest ? split_mode::exhaustive : split_mode::random;
  tc.seed = tree_seed(config.master_seed, index);
  if (config.bootstrap()) {
    const auto rows = bootstrap_rows(labels.size(), tc.seed);
    return fit_tree(columns, labels, rows, tc);
  }
  return fit_tree(columns, labels, tc);
}

/// Fits `config.n_trees` trees on up to `workers` threads. The result is
/// bit-identical for every worker count.
inline forest fit_forest(std::span<const std::vector<double>> columns, std::span<const int> labels,
                         std::vector<std::string> feature_names, forest_config config,
                         std::size_t workers = 1) {
  config.tree.mode =
      config.kind == forest_kind::random_forest ? split_mode::exhaustive : split_mode::random;
  config.tree.seed = 0;
  validate(config.tree);
  if (config.n_trees < 1) throw config_error("a forest needs at least one tree");
  if (labels.empty()) throw empty_input_error("cannot fit a forest on zero rows");
  if (feature_names.size() != columns.size())
    throw config_error("feature name count does not match column count");
  std::array<std::size_t, 2> counts{0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw data_error("labels must be 0 or 1");
    ++counts[static_cast<std::size_t>(y)];
  }
  if (counts[0] == 0 || counts[1] == 0)
    throw degenerate_class_error("forest training data contains a single class");

  std::vector<decision_tree> trees(config.n_trees);
  workers = std::clamp<std::size_t>(workers, 1, config.n_trees);
  if (workers == 1) {
    for (std::size_t i = 0; i < config.n_trees; ++i)
      trees[i] = fit_forest_member(columns, labels, config, i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < config.n_trees; i = next++) {
            try {
              trees[i] = fit_forest_member(columns, labels, config, i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return forest(std::move(trees), config, std::move(feature_names));
}

/// The first k names of the ranking.
inline std::vector<std::string> select_top_k(const importance_ranking& r, std::size_t k) {
  if (k < 1 || k > r.entries.size())
    throw config_error("top-k must lie in [1, " + std::to_string(r.entries.size()) + "], got " +
                       std::to_string(k));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(r.entries[i].first);
  return out;
}

// ---- JSON -------------------------------------------------------------------

inline constexpr std::string_view forest_format_tag = "hfsurv-forest/1";

inline nlohmann::ordered_json to_json(const forest_config& c) {
  return {{"kind", to_string(c.kind)},
          {"n_trees", c.n_trees},
          {"bootstrap", c.bootstrap()},
          {"master_seed", c.master_seed},
          {"tree", to_json(c.tree)}};
}

template <typename Json>
forest_config forest_config_from_json(const Json& j) {
  forest_config c;
  c.kind = parse_forest_kind(j.at("kind").template get<std::string>());
  c.n_trees = j.at("n_trees").template get<std::size_t>();
  c.master_seed = j.at("master_seed").template get<std::uint64_t>();
  c.tree = tree_config_from_json(j.at("tree"));
  return c;
}

inline nlohmann::ordered_json to_json(const importance_ranking& r) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [name, value] : r.entries) arr.push_back({{"feature", name}, {"importance", value}});
  return arr;
}

inline nlohmann::ordered_json to_json(const forest& f) {
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : f.trees()) trees.push_back(to_json(t));
  return {{"format", forest_format_tag},
          {"config", to_json(f.config())},
          {"feature_names", f.feature_names()},
          {"trees", std::move(trees)}};
}

template <typename Json>
forest forest_from_json(const Json& j) {
  if (!j.contains("format") || j.at("format").template get<std::string>() != forest_format_tag)
    throw schema_error("not a forest document (expected format '" + std::string(forest_format_tag) + "')");
  std::vector<decision_tree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(decision_tree_from_json(t));
  return forest(std::move(trees), forest_config_from_json(j.at("config")),
                j.at("feature_names").template get<std::vector<std::string>>());
}

}  // namespace hfsurv
