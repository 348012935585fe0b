#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coci {

enum class ErrorKind {
  MalformedDoi,
  UnmappedCharacter,
  UnknownSupplier,
  OddLengthBody,
  UnmappedCode,
  MalformedOci,
  InvalidDate,
  MalformedDuration,
  InvalidUrl,
  UnreadableFile,
  MalformedJson,
  StoreWriteFailure,
  SinkWriteFailure,
  SchemaMismatch,
  CorruptRow,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries one of the kinds above so
// callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the leading kind name.
  std::string_view detail() const noexcept { return std::string_view(what()).substr(to_string(kind_).size() + 2); }

 private:
  ErrorKind kind_;
};

}  // namespace coci
