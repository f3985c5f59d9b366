#include "consensus/csv.hpp"

#include <stdexcept>

namespace consensus::csv {

std::vector<Field> split_line(std::string_view line) {
  std::vector<Field> out;
  std::size_t i = 0;
  while (true) {
    Field f;
    f.column = i + 1;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            f.value.push_back('"');
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        f.value.push_back(line[i++]);
      }
      if (!closed) throw FieldError(f.column, "unterminated quoted field");
      if (i < line.size() && line[i] != ',') throw FieldError(i + 1, "text after closing quote");
    } else {
      while (i < line.size() && line[i] != ',') {
        if (line[i] == '"') throw FieldError(i + 1, "quote inside unquoted field");
        f.value.push_back(line[i++]);
      }
    }
    out.push_back(std::move(f));
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return out;
}

std::string quote(std::string_view field) {
  if (field.find_first_of("\r\n") != std::string_view::npos) throw FieldError(0, "line break inside a field");
  if (field.find_first_of(",\"") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(',');
    out += quote(fields[i]);
  }
  return out;
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    out.push_back(l);
    start = end + 1;
  }
  return out;
}

}  // namespace consensus::csv
