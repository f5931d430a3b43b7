#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace endorhythm::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks. Handles CRLF line endings and a leading UTF-8 BOM.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Throws ParseError on an
  // unterminated quoted field.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  bool first_ = true;
};

// Field quoted only when it contains a separator, quote or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace endorhythm::csv
