#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace voucher {

/// Input data violates a schema or domain invariant (CLI exit code 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed survey row. `row` is the 1-based line number in the source,
/// counting the header as line 1.
class IngestError : public ValidationError {
 public:
  IngestError(std::size_t row, std::string field, const std::string& message)
      : ValidationError("row " + std::to_string(row) + ", field '" + field + "': " + message),
        row_(row),
        field_(std::move(field)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

/// Bad configuration: voucher config, scenario file, flags (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure such as a singular matrix (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator was asked for a value over an empty sample.
class UndefinedEstimate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace voucher
