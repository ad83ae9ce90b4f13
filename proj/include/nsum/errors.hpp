#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsum {

/// Input that violates a model or file-format invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A malformed cell in a tabular input, with 1-based coordinates.
class CellError : public ValidationError {
public:
  CellError(std::size_t row, std::string column, const std::string& what);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

/// A chain whose variance is zero, so a diagnostic is undefined.
class DegenerateChainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Too few draws (or chains) for a diagnostic to be computed.
class InsufficientDrawsError : public std::length_error {
public:
  InsufficientDrawsError(std::size_t needed, std::size_t available, const std::string& what);

  std::size_t needed() const noexcept { return needed_; }
  std::size_t available() const noexcept { return available_; }

private:
  std::size_t needed_;
  std::size_t available_;
};

} // namespace nsum
