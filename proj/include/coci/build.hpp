#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "coci/aux_store.hpp"
#include "coci/ingest.hpp"
#include "coci/model.hpp"

namespace coci {

struct BuildConfig {
  std::string agent_iri = "https://w3id.org/oc";
  std::string source_url_template = "https://api.crossref.org/works/{doi}";
  Timestamp run_timestamp{};
};

// Replaces every "{doi}" in `url_template`.
std::string instantiate_source(std::string_view url_template, std::string_view doi);

struct GeneratedCitation {
  CitationRecord citation;
  ProvenanceRecord provenance;
};

// Called with a message for each reference that could not be turned into a
// citation because a DOI is not encodable.
using SkipLog = std::function<void(const std::string&)>;

// One citation per distinct cited DOI in the work's reference list.
std::vector<GeneratedCitation> generate_citations(const WorkRecord& work, const AuxStore& aux,
                                                  const BuildConfig& config, const SkipLog& log = {});

inline constexpr std::array<std::string_view, 7> kCitationColumns = {
    "oci", "citing", "cited", "creation", "timespan", "journal_sc", "author_sc"};
inline constexpr std::array<std::string_view, 4> kProvenanceColumns = {"oci", "agent", "source", "created"};

std::vector<std::string> citation_row(const CitationRecord& rec);
std::vector<std::string> provenance_row(const ProvenanceRecord& rec);
// Throw Error(CorruptRow) on any field that does not parse.
CitationRecord parse_citation_row(const std::vector<std::string>& row);
ProvenanceRecord parse_provenance_row(const std::vector<std::string>& row);
// Throws Error(SchemaMismatch) unless `header` is exactly `expected`.
void check_header(const std::vector<std::string>& header, std::span<const std::string_view> expected);

// Header plus one row per record, in the given order. Throw Error(SinkWriteFailure).
void emit_citations_csv(std::span<const CitationRecord> records, std::ostream& out);
void emit_provenance_csv(std::span<const ProvenanceRecord> records, std::ostream& out);

struct BuildReport {
  std::uint64_t files = 0;
  std::uint64_t skipped_files = 0;
  std::uint64_t works = 0;
  std::uint64_t citations = 0;       // rows written
  std::uint64_t duplicates = 0;      // repeated (citing, cited) pairs dropped
  std::uint64_t self_citations = 0;  // rows with citing = cited
  std::uint64_t unencodable = 0;
  std::vector<FileFailure> failures;
};

// Rescans `dump`, joins it with the aux store in `aux_dir` and writes
// `citations.csv` and `provenance.csv` to `out_dir`, rows ordered by
// (citing, cited). The first occurrence of a (citing, cited) pair is kept.
BuildReport run_build(const std::filesystem::path& dump, const std::filesystem::path& aux_dir,
                      const std::filesystem::path& out_dir, const BuildConfig& config,
                      const ScanOptions& options = {}, const SkipLog& log = {});

}  // namespace coci
