#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace consensus::csv {

struct Field {
  std::string value;
  std::size_t column = 1;  // 1-based character column where the field starts
};

class FieldError : public std::invalid_argument {
 public:
  FieldError(std::size_t column, const std::string& what) : std::invalid_argument(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Splits one line into fields. Fields containing a comma or quote are
/// written in double quotes with embedded quotes doubled. Throws
/// FieldError on malformed quoting; the caller attaches file and line.
std::vector<Field> split_line(std::string_view line);

/// Quotes a field only when it needs it.
std::string quote(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Splits text into lines, tolerating CRLF. A trailing newline does not
/// produce an extra empty line.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace consensus::csv
