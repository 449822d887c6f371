#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hfsurv/data.hpp"

#ifndef HFSURV_SOURCE_DIR
#define HFSURV_SOURCE_DIR "."
#endif
#ifndef HFSURV_UCI_CSV_HINT
#define HFSURV_UCI_CSV_HINT ""
#endif

namespace hfsurv::testkit {

inline std::filesystem::path source_dir() { return HFSURV_SOURCE_DIR; }

inline std::filesystem::path surrogate_csv() {
  return source_dir() / "data" / "heart_failure_surrogate.csv";
}

/// The real UCI file, looked up in $HFSURV_UCI_CSV, the CMake cache
/// variable of the same name, then data/ in the source tree.
inline std::optional<std::filesystem::path> uci_csv() {
  std::vector<std::filesystem::path> candidates;
  if (const char* env = std::getenv("HFSURV_UCI_CSV"); env && *env) candidates.emplace_back(env);
  if (std::string hint = HFSURV_UCI_CSV_HINT; !hint.empty()) candidates.emplace_back(hint);
  candidates.push_back(source_dir() / "data" / "heart_failure_clinical_records_dataset.csv");
  for (const auto& p : candidates)
    if (std::filesystem::is_regular_file(p)) return p;
  return std::nullopt;
}

/// A dataset with the clinical schema but arbitrary values, for tests that
/// only care about shape (split sizes, partition properties).
inline dataset shaped_dataset(std::size_t n0, std::size_t n1, unsigned seed = 1) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  dataset d;
  d.schema = heart_failure_schema();
  d.columns.assign(d.schema.size(), {});
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    for (auto& c : d.columns) c.push_back(u(gen));
    d.target.push_back(i < n0 ? 0 : 1);
  }
  return d;
}

}  // namespace hfsurv::testkit
