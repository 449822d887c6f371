#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "hfsurv/data.hpp"
#include "hfsurv/eda.hpp"
#include "hfsurv/scaler.hpp"
#include "hfsurv/split.hpp"

using namespace hfsurv;

namespace {

const std::string header =
    "age,anaemia,creatinine_phosphokinase,diabetes,ejection_fraction,high_blood_pressure,"
    "platelets,serum_creatinine,serum_sodium,sex,smoking,time,DEATH_EVENT";
const std::string good_row = "75,0,582,0,20,1,265000,1.9,130,1,0,4,1";

dataset single_column(std::vector<double> values) {
  dataset d;
  d.schema = {{"x", feature_kind::continuous, -1e9, 1e9, ""}};
  d.columns = {values};
  d.target.assign(values.size(), 0);
  return d;
}

}  // namespace

TEST(Parse, WellFormedRows) {
  const auto d = parse_dataset(header + "\n" + good_row + "\n" + good_row + "\n");
  EXPECT_EQ(d.n_rows(), 2u);
  EXPECT_EQ(d.n_features(), 12u);
  EXPECT_EQ(d.column("platelets")[0], 265000.0);
  EXPECT_EQ(d.column("serum_creatinine")[1], 1.9);
  EXPECT_EQ(d.target, (std::vector<int>{1, 1}));
}

TEST(Parse, ReordersColumnsToSchemaOrder) {
  const std::string shuffled =
      "DEATH_EVENT,time,smoking,sex,serum_sodium,serum_creatinine,platelets,high_blood_pressure,"
      "ejection_fraction,diabetes,creatinine_phosphokinase,anaemia,age\n"
      "0,4,0,1,130,1.9,265000,1,20,0,582,0,75\n";
  const auto d = parse_dataset(shuffled);
  EXPECT_EQ(d.feature_names().front(), "age");
  EXPECT_EQ(d.column("age")[0], 75.0);
  EXPECT_EQ(d.column("time")[0], 4.0);
  EXPECT_EQ(d.target[0], 0);
}

TEST(Parse, HeaderOnlyIsEmptyInput) {
  EXPECT_THROW(parse_dataset(header + "\n"), empty_input_error);
  EXPECT_THROW(parse_dataset(std::string_view("")), empty_input_error);
}

TEST(Parse, SchemaErrorsNameTheColumn) {
  auto renamed = header;
  renamed.replace(renamed.find("platelets"), 9, "platelet");
  try {
    parse_dataset(renamed + "\n" + good_row + "\n");
    FAIL() << "expected schema_error";
  } catch (const schema_error& e) {
    EXPECT_NE(std::string(e.what()).find("platelet"), std::string::npos);
  }
  const auto extra = header + ",extra\n" + good_row + ",1\n";
  EXPECT_THROW(parse_dataset(extra), schema_error);
  const auto missing = header.substr(0, header.rfind(',')) + "\n";
  EXPECT_THROW(parse_dataset(missing), schema_error);
}

TEST(Parse, BadCellReportsRowAndColumn) {
  auto bad = good_row;
  bad.replace(bad.find("582"), 3, "abc");
  try {
    parse_dataset(header + "\n" + good_row + "\n" + bad + "\n");
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "creatinine_phosphokinase");
  }
  EXPECT_THROW(parse_dataset(header + "\n75,0,582\n"), parse_error);
  EXPECT_THROW(parse_dataset(header + "\n" + good_row.substr(0, good_row.size() - 1) + "2\n"),
               parse_error);
}

TEST(Validate, CleanRowHasNoViolations) {
  EXPECT_TRUE(validate_dataset(parse_dataset(header + "\n" + good_row + "\n")).empty());
}

TEST(Validate, AgeBelowRange) {
  auto d = parse_dataset(header + "\n" + good_row + "\n");
  d.columns[d.require_index("age")][0] = 39;
  const auto v = validate_dataset(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].feature, "age");
  EXPECT_EQ(v[0].value, 39.0);
  EXPECT_NE(v[0].message.find("[40, 95]"), std::string::npos);
}

TEST(Validate, NonBooleanFlag) {
  auto d = parse_dataset(header + "\n" + good_row + "\n");
  d.columns[d.require_index("anaemia")][0] = 2;
  const auto v = validate_dataset(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].feature, "anaemia");
  EXPECT_NE(v[0].message.find("boolean"), std::string::npos);
}

TEST(Surrogate, ShapeMatchesTheClinicalFile) {
  const auto d = load_dataset(testkit::surrogate_csv());
  EXPECT_EQ(d.n_rows(), 299u);
  EXPECT_EQ(d.n_features(), 12u);
  EXPECT_EQ(d.class_counts(), (std::array<std::size_t, 2>{203, 96}));
  EXPECT_TRUE(validate_dataset(d).empty());
}

TEST(ClinicalFile, CountsAndRanges) {
  const auto path = testkit::uci_csv();
  if (!path) GTEST_SKIP() << "clinical records CSV not available";
  const auto d = load_dataset(*path);
  EXPECT_EQ(d.n_rows(), 299u);
  EXPECT_EQ(d.class_counts(), (std::array<std::size_t, 2>{203, 96}));
  EXPECT_TRUE(validate_dataset(d).empty());
  const std::vector<std::string> age{"age"};
  EXPECT_NEAR(fit_scaler(d, age).columns[0].mean, 60.8339, 1e-4);
  const auto s = eda_summarize(d);
  EXPECT_NEAR(s.class_proportions[0], 203.0 / 299.0, 1e-15);
}

TEST(LoadDataset, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/heart.csv"), io_error);
}

TEST(Scaler, TwoValues) {
  const auto d = single_column({0, 2});
  const auto p = fit_scaler(d);
  EXPECT_EQ(p.columns[0].mean, 1.0);
  EXPECT_EQ(p.columns[0].stddev, 1.0);
  EXPECT_EQ(apply_scaler(d, p).columns[0], (std::vector<double>{-1.0, 1.0}));
}

TEST(Scaler, ConstantColumnMapsToZero) {
  const auto d = single_column({5, 5, 5});
  const auto p = fit_scaler(d);
  EXPECT_EQ(p.columns[0].mean, 5.0);
  EXPECT_EQ(p.columns[0].stddev, 0.0);
  EXPECT_EQ(apply_scaler(d, p).columns[0], (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Scaler, Errors) {
  const std::vector<std::string> unknown{"nope"};
  EXPECT_THROW(fit_scaler(single_column({1, 2}), unknown), schema_error);
  EXPECT_THROW(fit_scaler(single_column({})), empty_input_error);
}

TEST(Scaler, UncoveredFeaturesAndTargetUntouched) {
  const auto d = testkit::shaped_dataset(6, 4);
  const std::vector<std::string> only{"age"};
  const auto z = apply_scaler(d, fit_scaler(d, only));
  for (std::size_t j = 1; j < d.n_features(); ++j) EXPECT_EQ(z.columns[j], d.columns[j]);
  EXPECT_EQ(z.target, d.target);
}

TEST(Scaler, StandardizesAndRoundTrips) {
  std::mt19937_64 gen(3);
  std::lognormal_distribution<double> skewed(3.0, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = testkit::shaped_dataset(1 + gen() % 40, 1 + gen() % 40, static_cast<unsigned>(trial));
    for (auto& col : d.columns)
      for (auto& v : col) v = skewed(gen);
    const auto p = fit_scaler(d);
    const auto z = apply_scaler(d, p);
    for (const auto& col : z.columns) {
      const double n = static_cast<double>(col.size());
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      EXPECT_NEAR(mean, 0.0, 1e-9);
      EXPECT_NEAR(std::sqrt(ss / n), 1.0, 1e-9);
    }
    const auto back = inverse_scaler(z, p);
    for (std::size_t j = 0; j < d.n_features(); ++j)
      for (std::size_t i = 0; i < d.n_rows(); ++i)
        EXPECT_NEAR(back.columns[j][i], d.columns[j][i], 1e-9 * std::max(1.0, std::abs(d.columns[j][i])));
  }
}

TEST(Split, TestCountsForTheClinicalShape) {
  EXPECT_EQ(stratified_test_counts({203, 96}, 0.2), (std::array<std::size_t, 2>{41, 19}));
  EXPECT_EQ(stratified_test_counts({5, 5}, 0.5), (std::array<std::size_t, 2>{3, 2}));
  const auto s = stratified_split(testkit::shaped_dataset(203, 96), 0.2, 0);
  EXPECT_EQ(s.test.n_rows(), 60u);
  EXPECT_EQ(s.train.n_rows(), 239u);
  EXPECT_EQ(s.test.class_counts(), (std::array<std::size_t, 2>{41, 19}));
}

TEST(Split, HalfOfTenRows) {
  const auto s = stratified_split(testkit::shaped_dataset(5, 5), 0.5, 0);
  EXPECT_EQ(s.test.n_rows(), 5u);
  EXPECT_EQ(s.train.n_rows(), 5u);
  std::set<std::size_t> test(s.test_rows.begin(), s.test_rows.end());
  for (std::size_t i : s.train_rows) EXPECT_FALSE(test.contains(i));
}

TEST(Split, DeterministicPerSeed) {
  const auto d = testkit::shaped_dataset(50, 30);
  EXPECT_EQ(stratified_split(d, 0.2, 7).test_rows, stratified_split(d, 0.2, 7).test_rows);
  EXPECT_NE(stratified_split(d, 0.2, 7).test_rows, stratified_split(d, 0.2, 8).test_rows);
}

TEST(Split, Errors) {
  EXPECT_THROW(stratified_split(testkit::shaped_dataset(10, 0), 0.2, 0), stratification_error);
  EXPECT_THROW(stratified_split(testkit::shaped_dataset(5, 5), 0.0, 0), config_error);
  EXPECT_THROW(stratified_split(testkit::shaped_dataset(5, 5), 1.0, 0), config_error);
  EXPECT_THROW(stratified_split(testkit::shaped_dataset(1, 1), 0.2, 0), stratification_error);
}

TEST(Split, PartitionAndStratificationProperties) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n0 = 1 + gen() % 60, n1 = 1 + gen() % 60;
    const double f = frac(gen);
    const auto d = testkit::shaped_dataset(n0, n1, static_cast<unsigned>(trial));
    split_result s;
    try {
      s = stratified_split(d, f, gen());
    } catch (const stratification_error&) {
      continue;  // tiny inputs can leave one side empty
    }
    std::vector<std::size_t> all = s.train_rows;
    all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n0 + n1);
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
    const auto counts = s.test.class_counts();
    EXPECT_LT(std::abs(static_cast<double>(counts[0]) - f * static_cast<double>(n0)), 1.0);
    EXPECT_LT(std::abs(static_cast<double>(counts[1]) - f * static_cast<double>(n1)), 1.0);
    EXPECT_EQ(s.test.n_rows(),
              static_cast<std::size_t>(std::floor(f * static_cast<double>(n0 + n1) + 0.5)));
  }
}

TEST(Eda, CorrelationExamples) {
  const std::vector<double> x{1, 2, 4, 8}, neg{-1, -2, -4, -8}, flat{3, 3, 3, 3};
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, neg), -1.0);
  EXPECT_EQ(pearson(x, flat), 0.0);
}

TEST(Eda, HistogramCoversEveryValue) {
  const std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto h = make_histogram("v", v, 5);
  EXPECT_EQ(h.edges.size(), 6u);
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 10.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2, 2, 2, 3}));
}

TEST(Eda, SummaryOnSurrogate) {
  const auto d = load_dataset(testkit::surrogate_csv());
  const auto s = eda_summarize(d, 8);
  EXPECT_NEAR(s.class_proportions[0], 203.0 / 299.0, 1e-15);
  EXPECT_NEAR(s.class_proportions[1], 96.0 / 299.0, 1e-15);
  EXPECT_EQ(s.histograms.size(), 7u);  // continuous features only
  for (const auto& h : s.histograms) {
    EXPECT_EQ(h.counts.size(), 8u);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), 299u);
  }
  ASSERT_EQ(s.correlation.size(), 13u);
  for (std::size_t a = 0; a < 13; ++a) {
    EXPECT_EQ(s.correlation[a][a], 1.0);
    for (std::size_t b = 0; b < 13; ++b) {
      EXPECT_EQ(s.correlation[a][b], s.correlation[b][a]);
      EXPECT_GE(s.correlation[a][b], -1.0);
      EXPECT_LE(s.correlation[a][b], 1.0);
    }
  }
  const auto j = to_json(s);
  EXPECT_EQ(j["correlation"]["columns"].size(), 13u);
  EXPECT_EQ(j["histograms"].size(), 7u);
  EXPECT_THROW(eda_summarize(d, 0), config_error);
}
