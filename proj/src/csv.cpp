#include "coci/csv.hpp"

#include "coci/error.hpp"

namespace coci::csv {

bool Reader::next(std::vector<std::string>& row) {
  row.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;
  ++line_;

  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw Error(ErrorKind::CorruptRow, "unterminated quoted field at line " + std::to_string(line_));
      row.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\n') {
      row.push_back(std::move(field));
      return true;
    } else if (ch == '\r' && in_.peek() == '\n') {
      in_.get();
      row.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

template <typename Range>
void write_fields(std::ostream& out, const Range& row) {
  bool first = true;
  for (const auto& field : row) {
    if (!first) out.put(',');
    first = false;
    out << quote(field);
  }
  out.put('\n');
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "CSV write failed");
}

}  // namespace

void write_row(std::ostream& out, const std::vector<std::string>& row) { write_fields(out, row); }

void write_row(std::ostream& out, std::initializer_list<std::string_view> row) { write_fields(out, row); }

}  // namespace coci::csv
