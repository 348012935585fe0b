#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coci/model.hpp"

namespace coci::rdf {

namespace vocab {
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kCitation = "http://purl.org/spar/cito/Citation";
inline constexpr std::string_view kJournalSelfCitation = "http://purl.org/spar/cito/JournalSelfCitation";
inline constexpr std::string_view kAuthorSelfCitation = "http://purl.org/spar/cito/AuthorSelfCitation";
inline constexpr std::string_view kHasCitingEntity = "http://purl.org/spar/cito/hasCitingEntity";
inline constexpr std::string_view kHasCitedEntity = "http://purl.org/spar/cito/hasCitedEntity";
inline constexpr std::string_view kHasCitationCreationDate = "http://purl.org/spar/cito/hasCitationCreationDate";
inline constexpr std::string_view kHasCitationTimeSpan = "http://purl.org/spar/cito/hasCitationTimeSpan";
inline constexpr std::string_view kWasAttributedTo = "http://www.w3.org/ns/prov#wasAttributedTo";
inline constexpr std::string_view kHadPrimarySource = "http://www.w3.org/ns/prov#hadPrimarySource";
inline constexpr std::string_view kGeneratedAtTime = "http://www.w3.org/ns/prov#generatedAtTime";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
}  // namespace vocab

struct IriScheme {
  std::string citation_base = "https://w3id.org/oc/index/coci/ci/";
  std::string entity_base = "http://dx.doi.org/";

  // Throws Error(InvalidConfig) unless both bases are absolute and end in '/'.
  void validate() const;
};

struct Term {
  enum class Kind { Iri, Literal };
  Kind kind = Kind::Iri;
  std::string value;     // IRI or lexical form
  std::string datatype;  // literals only; empty for plain strings

  static Term iri(std::string v) { return {Kind::Iri, std::move(v), {}}; }
  static Term literal(std::string v, std::string_view xsd_type) {
    return {Kind::Literal, std::move(v), std::string(vocab::kXsd) + std::string(xsd_type)};
  }
  bool operator==(const Term&) const = default;
};

struct Triple {
  std::string subject;  // IRI
  std::string predicate;
  Term object;
  bool operator==(const Triple&) const = default;
};

// Keeps ASCII letters, digits and "-._~/:"; percent-encodes every other byte.
std::string percent_encode_doi(std::string_view doi);
// Percent-encodes only the bytes N-Triples forbids inside <...>.
std::string escape_iri(std::string_view iri);
// Literal body with backslash, quote and control characters escaped.
std::string escape_literal(std::string_view text);

std::string citation_iri(const Oci& oci, const IriScheme& scheme = {});
std::string entity_iri(std::string_view doi, const IriScheme& scheme = {});

// 3 to 7 triples: type, citing, cited, optional creation date and timespan,
// one extra type per self-citation flag.
std::vector<Triple> citation_to_ntriples(const CitationRecord& rec, const IriScheme& scheme = {});
// Exactly 3 triples.
std::vector<Triple> provenance_to_ntriples(const ProvenanceRecord& prov, const IriScheme& scheme = {});

// "<s> <p> o .\n"
std::string format_triple(const Triple& t);
// Returns the number of triples written. Throws Error(SinkWriteFailure).
std::size_t write_ntriples(std::span<const Triple> triples, std::ostream& out);

struct ExportReport {
  std::uint64_t citations = 0;
  std::uint64_t provenance_records = 0;
  std::uint64_t data_triples = 0;
  std::uint64_t provenance_triples = 0;
  std::uint64_t corrupt_rows = 0;
};

// citations.csv and provenance.csv in `csv_dir` to citations.nt and
// citations-prov.nt in `out_dir`, in row order. Corrupt rows are counted and
// skipped; a wrong header throws Error(SchemaMismatch).
ExportReport export_rdf(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir,
                        const IriScheme& scheme = {}, std::ostream* warnings = nullptr);

}  // namespace coci::rdf
