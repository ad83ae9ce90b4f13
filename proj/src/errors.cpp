#include "nsum/errors.hpp"

namespace nsum {

CellError::CellError(std::size_t row, std::string column, const std::string& what)
    : ValidationError("row " + std::to_string(row) + ", column '" + column + "': " + what),
      row_(row), column_(std::move(column)) {}

InsufficientDrawsError::InsufficientDrawsError(std::size_t needed, std::size_t available,
                                               const std::string& what)
    : std::length_error(what + ": insufficient draws, need " + std::to_string(needed) +
                        ", have " + std::to_string(available)),
      needed_(needed), available_(available) {}

} // namespace nsum
