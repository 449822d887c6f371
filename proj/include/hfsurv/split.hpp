#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hfsurv/data.hpp"
#include "hfsurv/errors.hpp"
#include "hfsurv/random.hpp"

namespace hfsurv {

struct split_result {
  dataset train;
  dataset test;
  std::vector<std::size_t> train_rows;  // ascending indices into the source
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

/// Per-class test sizes. The total is round-half-up(test_fraction * n);
/// each class gets floor(test_fraction * n_c) and the leftover rows go to
/// the classes with the largest fractional parts (label 0 first on ties).
inline std::array<std::size_t, 2> stratified_test_counts(std::array<std::size_t, 2> class_counts,
                                                         double test_fraction) {
  const std::size_t n = class_counts[0] + class_counts[1];
  auto total = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n) + 0.5));
  std::array<std::size_t, 2> counts{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double exact = test_fraction * static_cast<double>(class_counts[c]);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += counts[c];
  }
  const std::size_t first = remainder[1] > remainder[0] ? 1 : 0;
  for (std::size_t c : {first, 1 - first}) {
    if (assigned < total && counts[c] < class_counts[c]) {
      ++counts[c];
      ++assigned;
    }
  }
  return counts;
}

/// Seeded stratified train/test partition. Rows of each class are shuffled
/// (class 0 first, one generator for both) and the first rows of each
/// shuffled class go to the test side.
inline split_result stratified_split(const dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw config_error("test fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < d.n_rows(); ++i)
    by_class[static_cast<std::size_t>(d.target[i])].push_back(i);
  for (std::size_t c = 0; c < 2; ++c)
    if (by_class[c].empty())
      throw stratification_error("class " + std::to_string(c) + " has no rows");

  const auto test_counts = stratified_test_counts({by_class[0].size(), by_class[1].size()},
                                                  test_fraction);
  split_result out;
  out.seed = seed;
  out.test_fraction = test_fraction;
  rng gen(seed);
  for (std::size_t c = 0; c < 2; ++c) {
    auto& rows = by_class[c];
    gen.shuffle(std::span<std::size_t>(rows));
    out.test_rows.insert(out.test_rows.end(), rows.begin(),
                         rows.begin() + static_cast<std::ptrdiff_t>(test_counts[c]));
    out.train_rows.insert(out.train_rows.end(),
                          rows.begin() + static_cast<std::ptrdiff_t>(test_counts[c]), rows.end());
  }
  if (out.train_rows.empty() || out.test_rows.empty())
    throw stratification_error("split leaves an empty partition");
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = d.take_rows(out.train_rows);
  out.test = d.take_rows(out.test_rows);
  return out;
}

}  // namespace hfsurv
