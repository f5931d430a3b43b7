#include "endorhythm/csv.hpp"

#include <istream>

#include "endorhythm/error.hpp"

namespace endorhythm::csv {

std::optional<Row> Reader::next() {
  int c = in_.peek();
  if (first_) {
    first_ = false;
    if (c == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      c = in_.peek();
    }
  }
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  Row row;
  row.line = line_;
  std::string field;
  bool quoted = false;
  bool after_quote = false;

  while (true) {
    c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError(row.line, "unterminated quoted field");
      row.fields.push_back(std::move(field));
      return row;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      row.fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      continue;
    } else if (ch == '\n') {
      ++line_;
      row.fields.push_back(std::move(field));
      return row;
    } else if (ch == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      field.push_back(ch);
    }
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
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
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace endorhythm::csv
