#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hfsurv {

// Every error raised by the library derives from `error`. The three
// intermediate classes map one-to-one onto the CLI exit codes.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, invalid hyperparameters, malformed grids. Exit code 1.
class config_error : public error {
public:
  using error::error;
};

/// Problems with the input data itself. Exit code 2.
class data_error : public error {
public:
  using error::error;
};

/// I/O and other runtime failures. Exit code 3.
class runtime_failure : public error {
public:
  using error::error;
};

class schema_error : public data_error {
public:
  using data_error::data_error;
};

class parse_error : public data_error {
public:
  parse_error(std::size_t row, std::string column, const std::string& what)
      : data_error("parse error at row " + std::to_string(row) + ", column '" + column +
                   "': " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

class empty_input_error : public data_error {
public:
  using data_error::data_error;
};

class stratification_error : public data_error {
public:
  using data_error::data_error;
};

class degenerate_class_error : public data_error {
public:
  using data_error::data_error;
};

class invalid_grid_error : public config_error {
public:
  using config_error::config_error;
};

class no_viable_combination_error : public runtime_failure {
public:
  using runtime_failure::runtime_failure;
};

class io_error : public runtime_failure {
public:
  using runtime_failure::runtime_failure;
};

enum class exit_code : int { ok = 0, usage = 1, data = 2, runtime = 3 };

inline exit_code exit_code_for(const error& e) noexcept {
  if (dynamic_cast<const config_error*>(&e) != nullptr) return exit_code::usage;
  if (dynamic_cast<const data_error*>(&e) != nullptr) return exit_code::data;
  return exit_code::runtime;
}

}  // namespace hfsurv
