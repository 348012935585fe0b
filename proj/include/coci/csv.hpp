#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace coci::csv {

// RFC 4180 reader. Quoted fields may span lines; CRLF and LF are both
// accepted as record terminators.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Throws Error(CorruptRow) on an
  // unterminated quoted field.
  bool next(std::vector<std::string>& row);

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& row);
void write_row(std::ostream& out, std::initializer_list<std::string_view> row);

}  // namespace coci::csv
