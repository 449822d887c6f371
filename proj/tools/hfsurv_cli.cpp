// hfsurv: command-line front end for the survival-prediction workflow.
//
//   hfsurv eda       --data heart.csv --out results/
//   hfsurv select    --data heart.csv --out results/ --top-k 4
//   hfsurv tune      --data heart.csv --out results/ --grid builtin
//   hfsurv train     --data heart.csv --out results/ --preset paper-tuned
//   hfsurv evaluate  --data heart.csv --out results/
//   hfsurv pipeline  --data heart.csv --out results/ [--preset paper-tuned]
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hfsurv/hfsurv.hpp"

namespace {

void add_common_flags(CLI::App& cmd, hfsurv::pipeline_config& cfg, std::string& preset) {
  cmd.add_option("--data", cfg.data, "Clinical records CSV")->required();
  cmd.add_option("--out", cfg.out, "Output directory")->default_str(".");
  cmd.add_option("--seed", cfg.seed, "Seed for every random choice")->default_str("0");
  cmd.add_option("--test-fraction", cfg.test_fraction, "Held-out fraction")->default_str("0.2");
  cmd.add_option("--top-k", cfg.top_k, "Number of features to keep")->default_str("4");
  cmd.add_option("--grid", cfg.grid, "Grid file, or 'builtin'")->default_str("builtin");
  cmd.add_option("--preset", preset, "Hyperparameter preset (paper-tuned)");
  cmd.add_option("--metric", cfg.metric, "Tuning metric")->default_str("accuracy");
  cmd.add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")->default_str("0");
  cmd.add_option("--n-trees", cfg.n_trees, "Trees per ensemble")->default_str("100");
  cmd.add_option("--bins", cfg.bins, "Histogram bins")->default_str("10");
}

int fail(hfsurv::exit_code code, const std::string& msg) {
  std::cerr << "hfsurv: error: " << msg << "\n";
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hfsurv;
  CLI::App app{"Heart-failure survival prediction: Extra-Trees selection + tuned Random Forest"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  pipeline_config cfg;
  std::string preset;
  std::string selected, params, model;

  auto* eda = app.add_subcommand("eda", "Class balance, histograms and correlations");
  auto* select = app.add_subcommand("select", "Rank features with Extra-Trees and keep the top k");
  auto* tune = app.add_subcommand("tune", "Grid-search Random Forest hyperparameters");
  auto* train = app.add_subcommand("train", "Fit the Random Forest and save model.json");
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on the test partition");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  for (auto* cmd : {eda, select, tune, train, evaluate, pipeline}) add_common_flags(*cmd, cfg, preset);
  for (auto* cmd : {tune, train, evaluate})
    cmd->add_option("--selected", selected, "selected.json from a previous select run");
  train->add_option("--params", params, "tune.json whose best combination to use");
  evaluate->add_option("--model", model, "Model file (default <out>/model.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(exit_code::usage);
  }

  if (!preset.empty()) cfg.preset = preset;
  if (!selected.empty()) cfg.selected = selected;
  if (!params.empty()) cfg.params = params;
  if (!model.empty()) cfg.model = model;

  try {
    validate(cfg);
    if (pipeline->parsed()) {
      const auto o = run_pipeline(cfg);
      std::cout << "accuracy " << percent(o.eval.metrics.accuracy) << "% on " << o.eval.n_test
                << " test rows; artifacts in " << cfg.out.string() << "\n";
      return 0;
    }
    const dataset d = load_checked(cfg.data);
    if (eda->parsed()) {
      const auto s = run_eda(cfg, d);
      std::cout << "class proportions: 0=" << s.class_proportions[0] << " 1=" << s.class_proportions[1]
                << "\n";
    } else if (select->parsed()) {
      const auto r = run_select(cfg, d);
      for (const auto& f : r.features) std::cout << f << "\n";
    } else if (tune->parsed()) {
      const auto r = run_tune(cfg, d, resolve_selection(cfg, d));
      std::cout << "best " << r.metric << " " << r.best_value << " " << to_json(r.best_combo).dump()
                << " (" << r.trials.size() << " trials, " << r.skipped_count() << " skipped)\n";
    } else if (train->parsed()) {
      run_train(cfg, d, resolve_selection(cfg, d));
      std::cout << "wrote " << (cfg.out / "model.json").string() << "\n";
    } else if (evaluate->parsed()) {
      const auto m = load_model(cfg.model.value_or(cfg.out / "model.json"));
      const auto e = run_evaluate(cfg, d, m);
      for (const auto& [name, value] : e.metrics.values())
        std::cout << name << " " << percent(value) << "\n";
    }
    return 0;
  } catch (const hfsurv::error& e) {
    return fail(exit_code_for(e), e.what());
  } catch (const std::exception& e) {
    return fail(exit_code::runtime, e.what());
  }
}
