#pragma once

// Line-level N-Triples grammar check (W3C RDF 1.1 N-Triples productions for
// IRIREF, STRING_LITERAL_QUOTE and datatype IRIs; blank nodes and language
// tags are not produced by the library and are rejected here).

#include <regex>
#include <string>

namespace testing {

inline bool is_ntriples_line(const std::string& line) {
  static const std::string iri = R"(<([^\x00-\x20<>"{}|^`\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>)";
  static const std::string literal = R"("([^"\\\n\r]|\\[tbnrf"'\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*")";
  static const std::regex re("^" + iri + " " + iri + " (" + iri + "|" + literal + "(\\^\\^" + iri + ")?) \\.$");
  return std::regex_match(line, re);
}

}  // namespace testing
