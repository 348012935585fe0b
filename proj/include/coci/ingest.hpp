#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coci/error.hpp"

namespace coci {

struct ReferenceEntry {
  std::optional<std::string> doi;  // normalized
  std::optional<int> year;

  bool operator==(const ReferenceEntry&) const = default;
};

// One item of a Crossref dump, reduced to the fields the index uses.
struct WorkRecord {
  std::string doi;          // normalized
  std::vector<int> issued;  // date-parts, cut at the first non-integer
  std::vector<std::string> issns;   // raw, as found in the dump
  std::vector<std::string> orcids;  // raw, as found in the dump
  std::optional<std::string> pub_type;
  std::vector<ReferenceEntry> references;

  bool operator==(const WorkRecord&) const = default;
};

struct FileFailure {
  std::filesystem::path path;
  ErrorKind kind;
  std::string message;
};

// Receives the dump contents in file order, on the thread that called
// scan_dump. Records of a file arrive between begin_file and either
// commit_file or abort_file; after abort_file the receiver should discard
// whatever that file contributed.
class DumpVisitor {
 public:
  virtual ~DumpVisitor() = default;
  virtual void begin_file(const std::filesystem::path&) {}
  virtual void record(WorkRecord&& work) = 0;
  virtual void commit_file(const std::filesystem::path&) {}
  virtual void abort_file(const FileFailure&) {}
};

struct ScanOptions {
  unsigned jobs = 1;                 // files parsed concurrently
  std::size_t queue_capacity = 512;  // records buffered per file in flight
};

struct ScanStats {
  std::uint64_t files = 0;  // committed files
  std::uint64_t skipped_files = 0;
  std::uint64_t items = 0;  // WorkRecords delivered from committed files
  std::uint64_t items_without_doi = 0;
  std::uint64_t bytes_read = 0;  // decompressed JSON bytes fed to the parser
  std::vector<FileFailure> failures;
};

// `*.json` and `*.json.gz` files under `path` (recursively, sorted by path),
// or `path` itself when it is a file. Throws Error(UnreadableFile) if the
// path does not exist.
std::vector<std::filesystem::path> list_dump_files(const std::filesystem::path& path);

// Streams every file once. Each file holds an object with an `items` array
// (at the top level or under `message`), or is itself an array of items.
// Items without a usable DOI are counted and skipped. Unreadable or malformed
// files are reported through abort_file and the scan continues; exceptions
// thrown by the visitor stop the scan and propagate.
ScanStats scan_dump(const std::filesystem::path& path, DumpVisitor& visitor, const ScanOptions& options = {});

// Whole dump in memory; for small inputs and tests.
std::vector<WorkRecord> read_dump(const std::filesystem::path& path, ScanStats* stats = nullptr);

}  // namespace coci
