#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "hfsurv/ensemble.hpp"
#include "hfsurv/scaler.hpp"
#include "hfsurv/split.hpp"

using namespace hfsurv;

namespace {

decision_tree leaf_tree(double p0, std::size_t n_features = 1) {
  return decision_tree({leaf_node{{p0, 1.0 - p0}}}, n_features, tree_config{});
}

forest leaf_forest(std::initializer_list<double> p0s) {
  std::vector<decision_tree> trees;
  for (double p : p0s) trees.push_back(leaf_tree(p));
  return forest(std::move(trees), forest_config{}, {"x"});
}

struct toy {
  std::vector<std::vector<double>> columns;
  std::vector<int> labels;
  std::vector<std::string> names;
};

toy noisy_toy(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  toy t;
  t.columns.assign(p, std::vector<double>(n));
  for (auto& col : t.columns)
    for (auto& v : col) v = static_cast<double>(gen() % 1000) / 10.0;
  for (std::size_t i = 0; i < n; ++i)
    t.labels.push_back((t.columns[0][i] > 50.0) != (gen() % 5 == 0) ? 1 : 0);
  for (std::size_t j = 0; j < p; ++j) t.names.push_back("f" + std::to_string(j));
  return t;
}

double accuracy(const forest& f, const dataset& test) {
  std::size_t right = 0;
  for (std::size_t i = 0; i < test.n_rows(); ++i)
    right += f.predict(test.row(i)) == test.target[i] ? 1 : 0;
  return static_cast<double>(right) / static_cast<double>(test.n_rows());
}

}  // namespace

TEST(ForestConfig, Defaults) {
  const auto c = make_forest_config(forest_kind::random_forest, 12, 0);
  EXPECT_EQ(c.n_trees, 100u);
  EXPECT_EQ(c.tree.max_features, 3u);
  EXPECT_TRUE(c.bootstrap());
  EXPECT_FALSE(make_forest_config(forest_kind::extra_trees, 4, 0).bootstrap());
  EXPECT_EQ(default_max_features(4), 2u);
  EXPECT_EQ(default_max_features(1), 1u);
  EXPECT_EQ(make_forest_config(forest_kind::extra_trees, 4, 0).tree.mode, split_mode::random);
}

TEST(ForestPredict, MeanOfTreeProbabilities) {
  const double row[] = {0.0};
  EXPECT_EQ(leaf_forest({1.0, 0.0}).predict_proba(row), (std::array<double, 2>{0.5, 0.5}));
  EXPECT_EQ(leaf_forest({1.0, 1.0}).predict_proba(row), (std::array<double, 2>{1.0, 0.0}));
  const auto p = leaf_forest({1.0, 1.0, 0.0}).predict_proba(row);
  EXPECT_DOUBLE_EQ(p[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0 / 3.0);
}

TEST(ForestPredict, ArgmaxWithTiesToPositive) {
  const double row[] = {0.0};
  EXPECT_EQ(leaf_forest({0.9}).predict(row), 0);
  EXPECT_EQ(leaf_forest({0.2}).predict(row), 1);
  EXPECT_EQ(leaf_forest({0.5}).predict(row), 1);
  EXPECT_EQ(leaf_forest({1.0, 0.0}).predict(row), 1);
}

TEST(ForestImportance, LoneLeavesGiveZeros) {
  const auto r = leaf_forest({1.0, 0.3}).feature_importances();
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].second, 0.0);
}

TEST(ForestImportance, SingleStumpPutsAllMassOnItsFeature) {
  const std::vector<std::vector<double>> cols{{5, 5, 5, 5}, {1, 2, 3, 4}, {7, 7, 7, 7}};
  const std::vector<int> y{0, 0, 1, 1};
  auto c = make_forest_config(forest_kind::random_forest, 3, 0);
  c.n_trees = 1;
  c.tree.max_features = 3;
  c.tree.max_depth = 1;
  // Find a seed whose bootstrap keeps both classes so the stump exists.
  for (std::uint64_t seed = 0;; ++seed) {
    c.master_seed = seed;
    const auto f = fit_forest(cols, y, {"a", "b", "c"}, c);
    if (f.trees()[0].nodes().size() == 1) continue;
    const auto r = f.feature_importances();
    EXPECT_EQ(r.entries[0].first, "b");
    EXPECT_EQ(r.entries[0].second, 1.0);
    EXPECT_EQ(r.entries[1].second, 0.0);
    EXPECT_EQ(r.names(), (std::vector<std::string>{"b", "a", "c"}));
    EXPECT_EQ(select_top_k(r, 1), (std::vector<std::string>{"b"}));
    EXPECT_EQ(select_top_k(r, 3), r.names());
    EXPECT_THROW(select_top_k(r, 0), config_error);
    EXPECT_THROW(select_top_k(r, 4), config_error);
    break;
  }
}

TEST(FitForest, EnsembleOfOneMatchesItsTree) {
  const auto t = noisy_toy(80, 3, 1);
  for (auto kind : {forest_kind::random_forest, forest_kind::extra_trees}) {
    auto c = make_forest_config(kind, 3, 42);
    c.n_trees = 1;
    const auto f = fit_forest(t.columns, t.labels, t.names, c);
    const auto lone = fit_forest_member(t.columns, t.labels, c, 0);
    EXPECT_EQ(f.trees()[0], lone);
    for (std::size_t i = 0; i < 80; ++i) {
      const double row[] = {t.columns[0][i], t.columns[1][i], t.columns[2][i]};
      EXPECT_EQ(f.predict_proba(row), lone.predict_proba(row));
    }
  }
}

TEST(FitForest, ExtraTreesSeeFullSampleAndRandomThresholds) {
  const auto t = noisy_toy(40, 2, 3);
  auto c = make_forest_config(forest_kind::extra_trees, 2, 9);
  c.n_trees = 1;
  c.tree.max_depth = 1;
  c.tree.max_features = 2;
  tree_config tc = c.tree;
  tc.mode = split_mode::random;
  tc.seed = tree_seed(9, 0);
  EXPECT_EQ(fit_forest(t.columns, t.labels, t.names, c).trees()[0], fit_tree(t.columns, t.labels, tc));
}

TEST(FitForest, DeterministicAndWorkerIndependent) {
  const auto t = noisy_toy(150, 5, 2);
  for (auto kind : {forest_kind::random_forest, forest_kind::extra_trees}) {
    auto c = make_forest_config(kind, 5, 7);
    c.n_trees = 24;
    const auto serial = to_json(fit_forest(t.columns, t.labels, t.names, c, 1)).dump();
    EXPECT_EQ(serial, to_json(fit_forest(t.columns, t.labels, t.names, c, 1)).dump());
    for (std::size_t w : {2u, 3u, 8u, 64u})
      EXPECT_EQ(serial, to_json(fit_forest(t.columns, t.labels, t.names, c, w)).dump()) << w;
    c.master_seed = 8;
    EXPECT_NE(serial, to_json(fit_forest(t.columns, t.labels, t.names, c, 1)).dump());
  }
}

TEST(FitForest, ProbabilitiesAreConvexCombinations) {
  const auto t = noisy_toy(120, 4, 4);
  auto c = make_forest_config(forest_kind::random_forest, 4, 1);
  c.n_trees = 15;
  c.tree.class_weight = class_weight_mode::balanced;
  const auto f = fit_forest(t.columns, t.labels, t.names, c);
  std::mt19937_64 gen(4);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> row(4);
    for (auto& v : row) v = static_cast<double>(gen() % 1100) / 10.0 - 5.0;
    const auto p = f.predict_proba(row);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    for (std::size_t cls = 0; cls < 2; ++cls) {
      double lo = 1.0, hi = 0.0;
      for (const auto& tree : f.trees()) {
        lo = std::min(lo, tree.predict_proba(row)[cls]);
        hi = std::max(hi, tree.predict_proba(row)[cls]);
      }
      EXPECT_GE(p[cls], lo - 1e-15);
      EXPECT_LE(p[cls], hi + 1e-15);
    }
  }
}

TEST(FitForest, ImportancesSumToOne) {
  const auto t = noisy_toy(100, 6, 5);
  for (auto kind : {forest_kind::random_forest, forest_kind::extra_trees}) {
    auto c = make_forest_config(kind, 6, 3);
    c.n_trees = 20;
    const auto r = fit_forest(t.columns, t.labels, t.names, c).feature_importances();
    double sum = 0.0;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      EXPECT_GE(r.entries[i].second, 0.0);
      if (i > 0) {
        EXPECT_GE(r.entries[i - 1].second, r.entries[i].second);
      }
      sum += r.entries[i].second;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(r.entries[0].first, "f0");
  }
}

TEST(FitForest, Errors) {
  const std::vector<std::vector<double>> cols{{1, 2, 3}};
  const std::vector<int> one_class{1, 1, 1};
  auto c = make_forest_config(forest_kind::random_forest, 1, 0);
  EXPECT_THROW(fit_forest(cols, one_class, {"x"}, c), degenerate_class_error);
  const std::vector<int> y{0, 1, 0};
  EXPECT_THROW(fit_forest(cols, y, {"x", "y"}, c), config_error);
  c.n_trees = 0;
  EXPECT_THROW(fit_forest(cols, y, {"x"}, c), config_error);
}

TEST(FitForest, MoreTreesReduceSeedVariance) {
  const auto d = load_dataset(testkit::surrogate_csv());
  const auto s = stratified_split(d, 0.2, 0);
  const auto p = fit_scaler(s.train);
  const auto train = apply_scaler(s.train, p), test = apply_scaler(s.test, p);
  auto spread = [&](std::size_t n_trees) {
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto c = make_forest_config(forest_kind::random_forest, 12, seed);
      c.n_trees = n_trees;
      const double acc = accuracy(fit_forest(train.columns, train.target, train.feature_names(), c, 4), test);
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
    return hi - lo;
  };
  EXPECT_LE(spread(100), spread(1));
}

TEST(ForestJson, RoundTrip) {
  const auto t = noisy_toy(60, 3, 6);
  auto c = make_forest_config(forest_kind::extra_trees, 3, 11);
  c.n_trees = 5;
  const auto f = fit_forest(t.columns, t.labels, t.names, c);
  const auto text = to_json(f).dump();
  const auto back = forest_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, f);
  EXPECT_EQ(to_json(back).dump(), text);
  EXPECT_THROW(forest_from_json(nlohmann::json{{"format", "other"}}), schema_error);
}
