#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace steam {

enum class ErrorCode {
  invalid_argument,
  data,
  separation,
  non_convergence,
  degenerate,
  numerical,
  io,
};

//! Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

//! Input-file problem located at a specific row (1-based data line, header is
//! line 1) and column.
class DataError : public Error {
public:
  DataError(std::size_t row, std::string column, const std::string& what)
    : Error(ErrorCode::data, format(row, column, what))
    , row_(row)
    , column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

private:
  static std::string format(std::size_t row, const std::string& column,
                            const std::string& what)
  {
    std::string out = "row " + std::to_string(row);
    if (!column.empty())
      out += ", column '" + column + "'";
    return out + ": " + what;
  }

  std::size_t row_;
  std::string column_;
};

} // namespace steam
