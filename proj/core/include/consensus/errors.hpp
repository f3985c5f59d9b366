#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace consensus {

// Malformed references between domain objects: unknown category ids,
// baseline mismatches, key sets that do not line up.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value is outside the range its type allows (sign convention,
// comment bounds, simulation parameters).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Text input rejected by a parser. Line and column are 1-based; column 0
// means the whole line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace consensus
