#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported audio container.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& field, const std::string& detail)
      : Error("wav decode error [" + field + "]: " + detail), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Caller supplied parameters outside an operation's domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input, located by 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& detail)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Input data that is well-formed but unusable (single class, empty set, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace adq
