#pragma once

// The end-to-end workflow behind the command-line tool:
//
//   eda -> scale -> select (Extra-Trees) -> stratified split -> tune
//       -> train (Random Forest) -> evaluate
//
// Each stage is callable on its own and writes its artifacts into the
// configured output directory. All randomness derives from config.seed.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hfsurv/data.hpp"
#include "hfsurv/eda.hpp"
#include "hfsurv/ensemble.hpp"
#include "hfsurv/errors.hpp"
#include "hfsurv/metrics.hpp"
#include "hfsurv/scaler.hpp"
#include "hfsurv/split.hpp"
#include "hfsurv/tune.hpp"
#include "hfsurv/version.hpp"

namespace hfsurv {

using json = nlohmann::ordered_json;

inline constexpr std::string_view model_format_tag = "hfsurv-model/1";
inline constexpr std::string_view report_format_tag = "hfsurv-report/1";
inline constexpr std::string_view paper_tuned_preset = "paper-tuned";

struct pipeline_config {
  std::filesystem::path data;
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::size_t top_k = 4;
  std::string grid = "builtin";       // "builtin" or a grid file
  std::optional<std::string> preset;  // "paper-tuned" skips tuning
  std::string metric = "accuracy";
  std::size_t workers = 0;            // 0: hardware concurrency
  std::size_t n_trees = 100;
  std::size_t bins = 10;
  std::optional<std::filesystem::path> selected;  // selected.json for tune/train/evaluate
  std::optional<std::filesystem::path> params;    // tune.json whose best combo train uses
  std::optional<std::filesystem::path> model;     // model.json for evaluate
};

inline void validate(const pipeline_config& c) {
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw config_error("--test-fraction must lie in (0, 1)");
  if (c.top_k < 1 || c.top_k > heart_failure_schema().size())
    throw config_error("--top-k must lie in [1, " + std::to_string(heart_failure_schema().size()) + "]");
  if (c.preset && *c.preset != paper_tuned_preset)
    throw config_error("unknown preset '" + *c.preset + "' (available: paper-tuned)");
  if (!is_known_metric(c.metric)) throw config_error("unknown metric '" + c.metric + "'");
  if (c.n_trees < 1) throw config_error("--n-trees must be at least 1");
  if (c.bins < 1) throw config_error("--bins must be at least 1");
}

inline std::size_t effective_workers(const pipeline_config& c) {
  if (c.workers > 0) return c.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline json to_json(const pipeline_config& c) {
  return {{"data", c.data.string()},
          {"seed", c.seed},
          {"test_fraction", c.test_fraction},
          {"top_k", c.top_k},
          {"grid", c.grid},
          {"preset", c.preset ? json(*c.preset) : json(nullptr)},
          {"metric", c.metric},
          {"n_trees", c.n_trees},
          {"bins", c.bins}};
}

// ---- file helpers -----------------------------------------------------------

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw schema_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

/// Loads the dataset and rejects it if any value is outside the schema.
inline dataset load_checked(const std::filesystem::path& path) {
  dataset d = load_dataset(path);
  const auto violations = validate_dataset(d);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << violations.size() << " value(s) outside the schema; first: row " << violations[0].row + 1
        << ": " << violations[0].message << " (value " << violations[0].value << ")";
    throw data_error(msg.str());
  }
  return d;
}

// ---- scaler / model JSON ----------------------------------------------------

inline json to_json(const scaler_params& p) {
  json arr = json::array();
  for (const auto& c : p.columns) arr.push_back({{"feature", c.feature}, {"mean", c.mean}, {"std", c.stddev}});
  return arr;
}

inline scaler_params scaler_params_from_json(const json& j) {
  scaler_params p;
  for (const auto& c : j)
    p.columns.push_back({c.at("feature").get<std::string>(), c.at("mean").get<double>(),
                         c.at("std").get<double>()});
  return p;
}

/// A fitted forest plus what is needed to apply it to raw CSV data.
struct trained_model {
  forest model;
  std::optional<std::vector<std::string>> selection;
  std::optional<scaler_params> scaler;
  std::optional<std::uint64_t> split_seed;
  std::optional<double> split_test_fraction;
  json hyperparameters = nullptr;
};

inline json to_json(const trained_model& m) {
  json j{{"format", model_format_tag}, {"forest", to_json(m.model)}};
  if (m.selection) j["selection"] = {{"features", *m.selection}};
  if (m.scaler) j["scaler"] = to_json(*m.scaler);
  if (m.split_seed && m.split_test_fraction)
    j["split"] = {{"seed", *m.split_seed}, {"test_fraction", *m.split_test_fraction}};
  j["hyperparameters"] = m.hyperparameters;
  return j;
}

/// Accepts a model document or a bare forest document (no selection,
/// scaling or split metadata).
inline trained_model trained_model_from_json(const json& j) {
  trained_model m;
  try {
    const std::string format = j.value("format", "");
    if (format == forest_format_tag) {
      m.model = forest_from_json(j);
      return m;
    }
    if (format != model_format_tag)
      throw schema_error("not a model document (format '" + format + "')");
    m.model = forest_from_json(j.at("forest"));
    if (j.contains("selection"))
      m.selection = j.at("selection").at("features").get<std::vector<std::string>>();
    if (j.contains("scaler")) m.scaler = scaler_params_from_json(j.at("scaler"));
    if (j.contains("split")) {
      m.split_seed = j.at("split").at("seed").get<std::uint64_t>();
      m.split_test_fraction = j.at("split").at("test_fraction").get<double>();
    }
    if (j.contains("hyperparameters")) m.hyperparameters = j.at("hyperparameters");
  } catch (const json::exception& e) {
    throw schema_error(std::string("malformed model document: ") + e.what());
  }
  return m;
}

// ---- stages -----------------------------------------------------------------

/// Forest settings of the tuned preset: balanced class weights, gini,
/// depth-1 trees with two leaves, min_samples_split 0.001.
inline forest_config paper_tuned_config(std::size_t n_features, std::uint64_t seed, std::size_t n_trees) {
  forest_config c = make_forest_config(forest_kind::random_forest, n_features, seed);
  c.n_trees = n_trees;
  c.tree.class_weight = class_weight_mode::balanced;
  c.tree.criterion = split_criterion::gini;
  c.tree.max_depth = 1;
  c.tree.max_leaf_nodes = 2;
  c.tree.min_samples_split = 0.001;
  return c;
}

inline json paper_tuned_combo_json() {
  return {{"class_weight", "balanced"}, {"criterion", "gini"},        {"max_depth", 1},
          {"max_leaf_nodes", 2},        {"min_samples_split", 0.001}, {"random_state", 0}};
}

inline eda_summary run_eda(const pipeline_config& cfg, const dataset& d) {
  ensure_directory(cfg.out);
  auto s = eda_summarize(d, cfg.bins);
  write_json(cfg.out / "eda.json", to_json(s));
  write_text(cfg.out / "correlation.csv", correlation_csv(s));
  return s;
}

struct selection_result {
  importance_ranking ranking;
  std::vector<std::string> features;
};

/// Standardizes every feature, fits an Extra-Trees ensemble and keeps the
/// top_k features by mean decrease in impurity.
inline selection_result run_select(const pipeline_config& cfg, const dataset& d) {
  ensure_directory(cfg.out);
  const dataset scaled = apply_scaler(d, fit_scaler(d));
  forest_config fc = make_forest_config(forest_kind::extra_trees, d.n_features(), cfg.seed);
  fc.n_trees = cfg.n_trees;
  const forest et = fit_forest(scaled.columns, scaled.target, scaled.feature_names(), fc,
                               effective_workers(cfg));
  selection_result r{et.feature_importances(), {}};
  r.features = select_top_k(r.ranking, cfg.top_k);
  write_json(cfg.out / "importances.json",
             {{"forest", {{"kind", to_string(fc.kind)}, {"n_trees", fc.n_trees}, {"master_seed", fc.master_seed}}},
              {"ranking", to_json(r.ranking)}});
  write_json(cfg.out / "selected.json", {{"top_k", cfg.top_k}, {"features", r.features}});
  return r;
}

inline std::vector<std::string> read_selected(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.contains("features")) throw schema_error("'" + path.string() + "' has no \"features\" list");
  return j.at("features").get<std::vector<std::string>>();
}

/// Selected features from --selected, else <out>/selected.json, else a
/// fresh selection run.
inline std::vector<std::string> resolve_selection(const pipeline_config& cfg, const dataset& d) {
  if (cfg.selected) return read_selected(*cfg.selected);
  if (std::filesystem::exists(cfg.out / "selected.json")) return read_selected(cfg.out / "selected.json");
  return run_select(cfg, d).features;
}

struct prepared_split {
  split_result split;
  scaler_params scaler;
};

/// Reduces to `features`, splits, and standardizes both sides with
/// statistics of the training rows only.
inline prepared_split prepare_split(const dataset& d, const std::vector<std::string>& features,
                                    double test_fraction, std::uint64_t seed) {
  prepared_split p{stratified_split(d.select_features(features), test_fraction, seed), {}};
  p.scaler = fit_scaler(p.split.train, features);
  p.split.train = apply_scaler(std::move(p.split.train), p.scaler);
  p.split.test = apply_scaler(std::move(p.split.test), p.scaler);
  return p;
}

inline hyper_grid resolve_grid(const pipeline_config& cfg) {
  if (cfg.grid == "builtin") return default_search_grid();
  return hyper_grid_from_json(read_json(cfg.grid));
}

/// Grid search on the split; the held-out 20% serves as validation set.
inline tune_result run_tune(const pipeline_config& cfg, const dataset& d,
                            const std::vector<std::string>& features) {
  ensure_directory(cfg.out);
  const auto grid = resolve_grid(cfg);
  const auto p = prepare_split(d, features, cfg.test_fraction, cfg.seed);
  forest_config base = make_forest_config(forest_kind::random_forest, features.size(), cfg.seed);
  base.n_trees = cfg.n_trees;
  try {
    auto result = tune_forest(grid, p.split.train, p.split.test, cfg.metric, base, effective_workers(cfg));
    write_json(cfg.out / "tune.json", to_json(result));
    return result;
  } catch (const all_trials_skipped_error& e) {
    json log = to_json(e.log());
    log["best_combo"] = nullptr;
    log["best_metric_value"] = nullptr;
    write_json(cfg.out / "tune.json", log);
    throw no_viable_combination_error(std::string(e.what()) + "; trial log in " +
                                      (cfg.out / "tune.json").string());
  }
}

/// Hyperparameters for training: the preset, else the best combination of
/// a tune result, else forest defaults.
inline std::pair<forest_config, json> resolve_hyperparameters(const pipeline_config& cfg,
                                                              std::size_t n_features,
                                                              const tune_result* tuned) {
  if (cfg.preset) return {paper_tuned_config(n_features, cfg.seed, cfg.n_trees), paper_tuned_combo_json()};
  forest_config base = make_forest_config(forest_kind::random_forest, n_features, cfg.seed);
  base.n_trees = cfg.n_trees;
  if (tuned) return {apply_combo(tuned->best_combo, base), to_json(tuned->best_combo)};
  if (cfg.params) {
    const json j = read_json(*cfg.params);
    if (!j.contains("best_combo")) throw schema_error("'" + cfg.params->string() + "' has no best_combo");
    const auto combo = hyper_combo_from_json(j.at("best_combo"));
    return {apply_combo(combo, base), to_json(combo)};
  }
  return {base, json::object()};
}

inline trained_model run_train(const pipeline_config& cfg, const dataset& d,
                               const std::vector<std::string>& features,
                               const tune_result* tuned = nullptr) {
  ensure_directory(cfg.out);
  const auto p = prepare_split(d, features, cfg.test_fraction, cfg.seed);
  auto [fc, hp] = resolve_hyperparameters(cfg, features.size(), tuned);
  trained_model m;
  m.model = fit_forest(p.split.train.columns, p.split.train.target, features, fc, effective_workers(cfg));
  m.selection = features;
  m.scaler = p.scaler;
  m.split_seed = cfg.seed;
  m.split_test_fraction = cfg.test_fraction;
  m.hyperparameters = std::move(hp);
  write_json(cfg.out / "model.json", to_json(m));
  return m;
}

struct evaluation {
  confusion_matrix cm;
  metrics_report metrics;
  roc_curve roc;
  std::size_t n_test = 0;
};

/// Scores the model on the test partition it was trained against and
/// writes report.json, confusion.json, roc.json and roc.csv.
inline evaluation run_evaluate(const pipeline_config& cfg, const dataset& d, const trained_model& m) {
  ensure_directory(cfg.out);
  const auto& model_features = m.model.feature_names();
  std::vector<std::string> features;
  if (m.selection) {
    if (*m.selection != model_features)
      throw schema_error("model selection metadata does not match its forest features");
    features = *m.selection;
  } else if (cfg.selected) {
    features = read_selected(*cfg.selected);
    if (features != model_features)
      throw schema_error("--selected features do not match the model's features");
  } else {
    features = d.feature_names();
    if (features != model_features) {
      std::string msg = "schema mismatch: model expects " + std::to_string(model_features.size()) +
                        " features (";
      for (std::size_t i = 0; i < model_features.size(); ++i)
        msg += (i ? "," : "") + model_features[i];
      msg += ") but data has " + std::to_string(features.size()) + " and no selection metadata was given";
      throw schema_error(msg);
    }
  }
  const double tf = m.split_test_fraction.value_or(cfg.test_fraction);
  const std::uint64_t seed = m.split_seed.value_or(cfg.seed);
  split_result split = stratified_split(d.select_features(features), tf, seed);
  dataset test = m.scaler ? apply_scaler(std::move(split.test), *m.scaler) : std::move(split.test);

  evaluation e;
  e.n_test = test.n_rows();
  std::vector<int> predicted(test.n_rows());
  std::vector<double> scores(test.n_rows());
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    const auto row = test.row(i);
    const auto p = m.model.predict_proba(row);
    scores[i] = p[1];
    predicted[i] = p[1] >= p[0] ? 1 : 0;
  }
  e.cm = make_confusion_matrix(test.target, predicted);
  e.metrics = evaluate_confusion(e.cm);
  e.roc = make_roc_curve(test.target, scores);

  write_json(cfg.out / "report.json", {{"format", report_format_tag},
                                       {"features", features},
                                       {"split", {{"seed", seed}, {"test_fraction", tf}}},
                                       {"n_test", e.n_test},
                                       {"confusion_matrix", to_json(e.cm)},
                                       {"metrics", to_json(e.metrics)},
                                       {"undefined", e.metrics.undefined},
                                       {"roc_curve_auc", e.roc.auc}});
  write_json(cfg.out / "confusion.json", to_json(e.cm));
  write_json(cfg.out / "roc.json", to_json(e.roc));
  write_text(cfg.out / "roc.csv", roc_csv(e.roc));
  return e;
}

inline trained_model load_model(const std::filesystem::path& path) {
  return trained_model_from_json(read_json(path));
}

struct pipeline_outcome {
  selection_result selection;
  std::optional<tune_result> tuning;
  trained_model model;
  evaluation eval;
};

/// Runs every stage and writes run_report.json alongside the stage outputs.
/// Only run_report.json carries wall-clock timings.
inline pipeline_outcome run_pipeline(const pipeline_config& cfg) {
  validate(cfg);
  ensure_directory(cfg.out);
  using clock = std::chrono::steady_clock;
  json timings = json::object();
  auto stamp = [&timings, last = clock::now()](const char* stage) mutable {
    const auto now = clock::now();
    timings[stage] = std::chrono::duration<double, std::milli>(now - last).count();
    last = now;
  };

  const dataset d = load_checked(cfg.data);
  stamp("load");
  run_eda(cfg, d);
  stamp("eda");
  pipeline_outcome o;
  o.selection = run_select(cfg, d);
  stamp("select");
  if (!cfg.preset) {
    o.tuning = run_tune(cfg, d, o.selection.features);
    stamp("tune");
  }
  o.model = run_train(cfg, d, o.selection.features, o.tuning ? &*o.tuning : nullptr);
  stamp("train");
  o.eval = run_evaluate(cfg, d, o.model);
  stamp("evaluate");

  json artifacts{{"eda", "eda.json"},         {"correlation", "correlation.csv"},
                 {"importances", "importances.json"}, {"selected", "selected.json"},
                 {"model", "model.json"},     {"report", "report.json"},
                 {"confusion", "confusion.json"}, {"roc", "roc.json"},
                 {"roc_csv", "roc.csv"}};
  json tuning = nullptr;
  if (o.tuning) {
    artifacts["tune"] = "tune.json";
    tuning = {{"best_combo", to_json(o.tuning->best_combo)},
              {"best_metric_value", o.tuning->best_value},
              {"n_trials", o.tuning->trials.size()},
              {"n_skipped", o.tuning->skipped_count()}};
  }
  write_json(cfg.out / "run_report.json",
             {{"version", std::string(version)},
              {"config", to_json(cfg)},
              {"artifacts", artifacts},
              {"importances", to_json(o.selection.ranking)},
              {"selected", o.selection.features},
              {"tuning", tuning},
              {"hyperparameters", o.model.hyperparameters},
              {"confusion_matrix", to_json(o.eval.cm)},
              {"metrics", to_json(o.eval.metrics)},
              {"roc_curve_auc", o.eval.roc.auc},
              {"timings_ms", timings}});
  return o;
}

}  // namespace hfsurv
