#include "coci/error.hpp"

namespace coci {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedDoi: return "MalformedDoi";
    case ErrorKind::UnmappedCharacter: return "UnmappedCharacter";
    case ErrorKind::UnknownSupplier: return "UnknownSupplier";
    case ErrorKind::OddLengthBody: return "OddLengthBody";
    case ErrorKind::UnmappedCode: return "UnmappedCode";
    case ErrorKind::MalformedOci: return "MalformedOci";
    case ErrorKind::InvalidDate: return "InvalidDate";
    case ErrorKind::MalformedDuration: return "MalformedDuration";
    case ErrorKind::InvalidUrl: return "InvalidUrl";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::StoreWriteFailure: return "StoreWriteFailure";
    case ErrorKind::SinkWriteFailure: return "SinkWriteFailure";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::CorruptRow: return "CorruptRow";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace coci
