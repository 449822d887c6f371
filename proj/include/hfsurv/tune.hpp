#pragma once

// Exhaustive grid search. Every combination of the grid is evaluated and
// the first one with a strictly greater metric wins; combinations the model
// rejects as invalid are logged as skipped and never become best.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/data.hpp"
#include "hfsurv/ensemble.hpp"
#include "hfsurv/errors.hpp"
#include "hfsurv/metrics.hpp"
#include "hfsurv/tree.hpp"

namespace hfsurv {

/// One hyperparameter value; std::monostate stands for "None".
using hyper_value = std::variant<std::monostate, std::int64_t, double, std::string>;

struct hyper_param {
  std::string name;
  std::vector<hyper_value> values;
};

/// Parameters in generation order.
struct hyper_grid {
  std::vector<hyper_param> params;

  std::size_t size() const {
    std::size_t n = params.empty() ? 0 : 1;
    for (const auto& p : params) n *= p.values.size();
    return n;
  }
};

struct hyper_combo {
  std::vector<std::pair<std::string, hyper_value>> values;

  const hyper_value* find(std::string_view name) const {
    for (const auto& [n, v] : values)
      if (n == name) return &v;
    return nullptr;
  }

  friend bool operator==(const hyper_combo&, const hyper_combo&) = default;
};

inline void validate(const hyper_grid& g) {
  if (g.params.empty()) throw invalid_grid_error("grid has no parameters");
  std::set<std::string> seen;
  for (const auto& p : g.params) {
    if (p.values.empty()) throw invalid_grid_error("parameter '" + p.name + "' has no values");
    if (!seen.insert(p.name).second) throw invalid_grid_error("duplicate parameter '" + p.name + "'");
  }
}

/// Cartesian product, last parameter varying fastest.
inline std::vector<hyper_combo> generate_combinations(const hyper_grid& g) {
  validate(g);
  std::vector<hyper_combo> out;
  out.reserve(g.size());
  std::vector<std::size_t> digit(g.params.size(), 0);
  for (;;) {
    hyper_combo c;
    for (std::size_t k = 0; k < g.params.size(); ++k)
      c.values.emplace_back(g.params[k].name, g.params[k].values[digit[k]]);
    out.push_back(std::move(c));
    std::size_t k = g.params.size();
    while (k > 0) {
      --k;
      if (++digit[k] < g.params[k].values.size()) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
  }
}

struct trial {
  hyper_combo combo;
  std::optional<double> value;  // empty when skipped
  std::string skip_reason;
  std::string note;

  bool skipped() const noexcept { return !value.has_value(); }
};

struct tune_result {
  std::string metric;
  hyper_combo best_combo;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<trial> trials;  // generation order

  std::size_t skipped_count() const {
    std::size_t n = 0;
    for (const auto& t : trials) n += t.skipped() ? 1 : 0;
    return n;
  }
};

/// Thrown when every trial was skipped; carries the trial log.
class all_trials_skipped_error : public no_viable_combination_error {
public:
  all_trials_skipped_error(const std::string& what, tune_result log)
      : no_viable_combination_error(what), log_(std::move(log)) {}
  const tune_result& log() const noexcept { return log_; }

private:
  tune_result log_;
};

/// Evaluates every combination with `evaluate(combo) -> double` (higher is
/// better). A config_error thrown by `evaluate` marks the trial skipped.
/// Trials may run on several threads; the reduction walks them in
/// generation order, so the result matches a sequential run.
template <typename Evaluate>
tune_result grid_search(const hyper_grid& grid, Evaluate&& evaluate, std::string metric = "accuracy",
                        std::size_t workers = 1) {
  auto combos = generate_combinations(grid);
  tune_result result;
  result.metric = std::move(metric);
  result.trials.resize(combos.size());

  auto run_one = [&](std::size_t i) {
    trial& t = result.trials[i];
    t.combo = combos[i];
    try {
      t.value = evaluate(std::as_const(t.combo));
    } catch (const config_error& e) {
      t.value.reset();
      t.skip_reason = e.what();
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, combos.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < combos.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < combos.size(); i = next++) {
            try {
              run_one(i);
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

  bool found = false;
  for (const auto& t : result.trials) {
    if (t.value && (!found || *t.value > result.best_value)) {
      result.best_value = *t.value;
      result.best_combo = t.combo;
      found = true;
    }
  }
  if (!found)
    throw all_trials_skipped_error("all " + std::to_string(result.trials.size()) +
                                       " combinations were skipped as invalid",
                                   std::move(result));
  return result;
}

// ---- random-forest adapter --------------------------------------------------

namespace detail {

inline std::int64_t as_int(const hyper_value& v, std::string_view name) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw invalid_grid_error("parameter '" + std::string(name) + "' needs integer values");
}

inline double as_number(const hyper_value& v, std::string_view name) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw invalid_grid_error("parameter '" + std::string(name) + "' needs numeric values");
}

inline std::string as_label(const hyper_value& v, std::string_view name) {
  if (std::holds_alternative<std::monostate>(v)) return "None";
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw invalid_grid_error("parameter '" + std::string(name) + "' needs string or null values");
}

inline std::string canonical_param(std::string_view name) {
  if (name == "max_leaf_node") return "max_leaf_nodes";
  if (name == "class_weights") return "class_weight";
  return std::string(name);
}

}  // namespace detail

/// Grid over the random-forest hyperparameters with the value sets
///   max_depth 1..10, min_samples_split {0.001, 0.01, 0.1, 0.2, 0.02, 0.002},
///   criterion {gini, entropy, None}, max_leaf_nodes 1..10,
///   class_weight {balanced, None}
/// (3600 combinations).
inline hyper_grid default_search_grid() {
  hyper_grid g;
  auto range = [](std::int64_t lo, std::int64_t hi) {
    std::vector<hyper_value> v;
    for (std::int64_t i = lo; i <= hi; ++i) v.emplace_back(i);
    return v;
  };
  g.params.push_back({"max_depth", range(1, 10)});
  g.params.push_back({"min_samples_split", {0.001, 0.01, 0.1, 0.2, 0.02, 0.002}});
  g.params.push_back({"criterion", {std::string("gini"), std::string("entropy"), std::monostate{}}});
  g.params.push_back({"max_leaf_nodes", range(1, 10)});
  g.params.push_back({"class_weight", {std::string("balanced"), std::monostate{}}});
  return g;
}

namespace detail {

/// Stores one grid value in `c`. Wrong value types and unknown names are
/// grid errors; range checks are left to validate(tree_config).
inline void assign_param(forest_config& c, const std::string& raw_name, const hyper_value& v) {
  const auto name = canonical_param(raw_name);
  auto count = [&] { return static_cast<std::size_t>(std::max<std::int64_t>(0, as_int(v, name))); };
  try {
    if (name == "max_depth") {
      c.tree.max_depth = count();
    } else if (name == "min_samples_split") {
      c.tree.min_samples_split = as_number(v, name);
    } else if (name == "criterion") {
      c.tree.criterion = parse_criterion(as_label(v, name));
    } else if (name == "max_leaf_nodes") {
      c.tree.max_leaf_nodes = count();
    } else if (name == "class_weight") {
      c.tree.class_weight = parse_class_weight(as_label(v, name));
    } else if (name == "n_trees") {
      c.n_trees = count();
    } else if (name == "max_features") {
      c.tree.max_features = count();
    } else {
      throw invalid_grid_error("unknown hyperparameter '" + raw_name + "'");
    }
  } catch (const invalid_grid_error&) {
    throw;
  } catch (const config_error& e) {
    throw invalid_grid_error(e.what());
  }
}

}  // namespace detail

/// Rejects parameter names the forest adapter does not understand and
/// values of the wrong type, before any trial runs.
inline void validate_forest_grid(const hyper_grid& g) {
  validate(g);
  forest_config scratch;
  for (const auto& p : g.params)
    for (const auto& v : p.values) detail::assign_param(scratch, p.name, v);
}

/// Applies a combination to `base`. Throws config_error when the result is
/// not a valid forest (for example max_leaf_nodes < 2).
inline forest_config apply_combo(const hyper_combo& combo, forest_config base) {
  for (const auto& [name, v] : combo.values) detail::assign_param(base, name, v);
  if (base.n_trees < 1) throw config_error("n_trees must be at least 1");
  validate(base.tree);
  return base;
}

/// Grid search for a random forest: each trial refits with `base`'s master
/// seed on `train` and scores `metric` on `validation`.
inline tune_result tune_forest(const hyper_grid& grid, const dataset& train,
                               const dataset& validation, const std::string& metric,
                               const forest_config& base, std::size_t workers = 1) {
  validate_forest_grid(grid);
  if (!is_known_metric(metric)) throw config_error("unknown metric '" + metric + "'");
  if (validation.n_rows() == 0) throw empty_input_error("validation set is empty");
  if (train.feature_names() != validation.feature_names())
    throw schema_error("train and validation features differ");
  const auto names = train.feature_names();
  auto evaluate = [&](const hyper_combo& combo) {
    const forest_config cfg = apply_combo(combo, base);
    const forest f = fit_forest(train.columns, train.target, names, cfg, 1);
    std::vector<int> predicted(validation.n_rows());
    for (std::size_t i = 0; i < validation.n_rows(); ++i) predicted[i] = f.predict(validation.row(i));
    return metric_value(evaluate_confusion(make_confusion_matrix(validation.target, predicted)), metric);
  };
  auto annotate = [](tune_result& r) {
    for (auto& t : r.trials)
      if (const auto* c = t.combo.find("criterion"); c && std::holds_alternative<std::monostate>(*c))
        t.note = "criterion None treated as gini";
  };
  try {
    auto result = grid_search(grid, evaluate, metric, workers);
    annotate(result);
    return result;
  } catch (all_trials_skipped_error& e) {
    tune_result log = e.log();
    annotate(log);
    throw all_trials_skipped_error(e.what(), std::move(log));
  }
}

// ---- JSON -------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const hyper_value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else return x;
      },
      v);
}

template <typename Json>
hyper_value hyper_value_from_json(const Json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_number_integer()) return j.template get<std::int64_t>();
  if (j.is_number()) return j.template get<double>();
  if (j.is_string()) return j.template get<std::string>();
  throw invalid_grid_error("unsupported hyperparameter value " + j.dump());
}

inline nlohmann::ordered_json to_json(const hyper_combo& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, v] : c.values) j[name] = to_json(v);
  return j;
}

template <typename Json>
hyper_combo hyper_combo_from_json(const Json& j) {
  hyper_combo c;
  for (auto it = j.begin(); it != j.end(); ++it)
    c.values.emplace_back(it.key(), hyper_value_from_json(it.value()));
  return c;
}

/// {"order": [names...], "parameters": {name: [values...]}}
inline nlohmann::ordered_json to_json(const hyper_grid& g) {
  nlohmann::ordered_json order = nlohmann::ordered_json::array();
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& p : g.params) {
    order.push_back(p.name);
    auto values = nlohmann::ordered_json::array();
    for (const auto& v : p.values) values.push_back(to_json(v));
    params[p.name] = std::move(values);
  }
  return {{"order", std::move(order)}, {"parameters", std::move(params)}};
}

/// Reads a grid document. Without an "order" field, parameters are taken
/// in document order.
template <typename Json>
hyper_grid hyper_grid_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("parameters") || !j.at("parameters").is_object())
    throw invalid_grid_error("grid document needs a \"parameters\" object");
  const auto& params = j.at("parameters");
  std::vector<std::string> order;
  if (j.contains("order")) {
    order = j.at("order").template get<std::vector<std::string>>();
    if (order.size() != params.size())
      throw invalid_grid_error("\"order\" must list every parameter exactly once");
  } else {
    for (auto it = params.begin(); it != params.end(); ++it) order.push_back(it.key());
  }
  hyper_grid g;
  for (const auto& name : order) {
    if (!params.contains(name)) throw invalid_grid_error("\"order\" names unknown parameter '" + name + "'");
    hyper_param p{name, {}};
    const auto& values = params.at(name);
    if (!values.is_array()) throw invalid_grid_error("parameter '" + name + "' must be a list");
    for (const auto& v : values) p.values.push_back(hyper_value_from_json(v));
    g.params.push_back(std::move(p));
  }
  validate(g);
  return g;
}

inline nlohmann::ordered_json to_json(const tune_result& r) {
  auto trials = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    nlohmann::ordered_json jt{{"index", i},
                              {"combo", to_json(t.combo)},
                              {"metric_value", t.value ? nlohmann::ordered_json(*t.value)
                                                       : nlohmann::ordered_json(nullptr)},
                              {"skipped", t.skipped()}};
    if (t.skipped()) jt["reason"] = t.skip_reason;
    if (!t.note.empty()) jt["note"] = t.note;
    trials.push_back(std::move(jt));
  }
  return {{"metric", r.metric},
          {"best_combo", to_json(r.best_combo)},
          {"best_metric_value", r.best_value},
          {"n_trials", r.trials.size()},
          {"n_skipped", r.skipped_count()},
          {"trials", std::move(trials)}};
}

}  // namespace hfsurv
