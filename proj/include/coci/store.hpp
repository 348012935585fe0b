#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "coci/model.hpp"

namespace coci {

inline constexpr std::size_t kDefaultPageSize = 1000;

struct LoadReport {
  std::uint64_t inserted = 0;
  std::uint64_t updated = 0;
  std::uint64_t unchanged = 0;
  std::uint64_t corrupt = 0;
};

struct Page {
  std::vector<CitationRecord> records;
  std::uint64_t total = 0;  // size of the full, unpaginated list
};

// Percentage rounded to one decimal; 0 when `total` is 0.
double share_percent(std::uint64_t count, std::uint64_t total) noexcept;

struct CorpusStats {
  std::uint64_t citations = 0;
  std::uint64_t entities = 0;  // distinct DOIs over both roles
  std::uint64_t journal_sc = 0;
  std::uint64_t author_sc = 0;
  std::uint64_t with_timespan = 0;
  std::uint64_t without_timespan = 0;

  double journal_sc_share() const noexcept { return share_percent(journal_sc, citations); }
  double author_sc_share() const noexcept { return share_percent(author_sc, citations); }

  std::string to_json() const;
  std::string to_text() const;
};

// DOI prefix ("10.1007") to publisher label.
using PrefixMap = std::map<std::string, std::string>;

// Two-column `prefix,label` CSV. Throws Error(UnreadableFile),
// Error(SchemaMismatch) or Error(InvalidConfig).
PrefixMap load_prefix_map(const std::filesystem::path& path);

inline constexpr std::string_view kOtherPublisher = "other";

struct PublisherRow {
  std::string label;
  std::vector<std::string> prefixes;  // prefixes seen in the index, sorted
  std::uint64_t outgoing = 0;
  std::uint64_t incoming = 0;

  std::uint64_t total() const noexcept { return outgoing + incoming; }
  bool operator==(const PublisherRow&) const = default;
};

struct PublisherStats {
  // Sorted by outgoing + incoming descending, then by label.
  std::vector<PublisherRow> rows;

  std::string to_json() const;
  std::string to_text() const;
};

/// Persistent citation index over the CSVs written by run_build.
///
/// Lives in `<dir>/index.sqlite`. Queries from any number of threads run on
/// pooled read connections, each inside its own read transaction, so a
/// concurrent load (in this or another process) becomes visible atomically
/// when it commits.
class CitationIndex {
 public:
  enum class Mode { ReadWrite, ReadOnly };

  // ReadWrite creates the index if missing. ReadOnly throws
  // Error(UnreadableFile) when there is no index.
  static CitationIndex open(const std::filesystem::path& dir, Mode mode = Mode::ReadWrite);

  CitationIndex(CitationIndex&&) noexcept;
  CitationIndex& operator=(CitationIndex&&) noexcept;
  ~CitationIndex();

  // OCI-keyed upsert of every row of every file, in one transaction.
  // Corrupt rows are counted, reported to `warnings` and skipped; a wrong
  // header throws Error(SchemaMismatch) and nothing is applied.
  LoadReport load(const std::vector<std::filesystem::path>& csv_files, std::ostream* warnings = nullptr);

  // Citations by citing DOI, ordered by cited DOI. DOIs are matched after
  // normalization; an invalid or unknown DOI gives an empty page.
  Page outgoing(std::string_view doi, std::size_t offset = 0, std::size_t limit = kDefaultPageSize) const;
  // Citations by cited DOI, ordered by citing DOI.
  Page incoming(std::string_view doi, std::size_t offset = 0, std::size_t limit = kDefaultPageSize) const;
  std::optional<CitationRecord> by_oci(const Oci& oci) const;

  std::uint64_t reference_count(std::string_view doi) const { return outgoing(doi, 0, 0).total; }
  std::uint64_t citation_count(std::string_view doi) const { return incoming(doi, 0, 0).total; }

  CorpusStats corpus_stats() const;
  PublisherStats publisher_stats(const PrefixMap& prefixes) const;

 private:
  struct Impl;
  explicit CitationIndex(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace coci
