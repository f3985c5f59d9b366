#include "consensus/errors.hpp"

#include <fmt/format.h>

namespace consensus {

namespace {

std::string locate(const std::string& source, std::size_t line, std::size_t column, const std::string& what) {
  if (column == 0) return fmt::format("{}:{}: {}", source, line, what);
  return fmt::format("{}:{}:{}: {}", source, line, column, what);
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(locate(source, line, column, what)),
      source_(std::move(source)),
      line_(line),
      column_(column) {}

}  // namespace consensus
