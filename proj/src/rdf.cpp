#include "coci/rdf.hpp"

#include <fstream>

#include "coci/build.hpp"
#include "coci/csv.hpp"

namespace coci::rdf {

namespace fs = std::filesystem;

namespace {

constexpr char kHex[] = "0123456789ABCDEF";

void append_percent(std::string& out, unsigned char c) {
  out.push_back('%');
  out.push_back(kHex[c >> 4]);
  out.push_back(kHex[c & 15]);
}

std::string_view date_type(DatePrecision p) {
  switch (p) {
    case DatePrecision::Year: return "gYear";
    case DatePrecision::Month: return "gYearMonth";
    case DatePrecision::Day: return "date";
  }
  return "date";
}

}  // namespace

void IriScheme::validate() const {
  for (const auto* base : {&citation_base, &entity_base}) {
    if (!is_absolute_url(*base) || base->back() != '/' || escape_iri(*base) != *base)
      throw Error(ErrorKind::InvalidConfig, "IRI base must be absolute and end in '/': " + *base);
  }
}

std::string percent_encode_doi(std::string_view doi) {
  std::string out;
  out.reserve(doi.size());
  for (char ch : doi) {
    const auto c = static_cast<unsigned char>(ch);
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '.' || c == '_' || c == '~' || c == '/' || c == ':';
    if (keep) out.push_back(ch);
    else append_percent(out, c);
  }
  return out;
}

std::string escape_iri(std::string_view iri) {
  std::string out;
  out.reserve(iri.size());
  for (char ch : iri) {
    const auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || ch == '<' || ch == '>' || ch == '"' || ch == '{' || ch == '}' || ch == '|' || ch == '^' ||
        ch == '`' || ch == '\\')
      append_percent(out, c);
    else
      out.push_back(ch);
  }
  return out;
}

std::string escape_literal(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20 || ch == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(static_cast<unsigned char>(ch)));
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  return out;
}

std::string citation_iri(const Oci& oci, const IriScheme& scheme) {
  return scheme.citation_base + format_oci(oci, OciForm::Bare);
}

std::string entity_iri(std::string_view doi, const IriScheme& scheme) {
  return scheme.entity_base + percent_encode_doi(doi);
}

std::vector<Triple> citation_to_ntriples(const CitationRecord& rec, const IriScheme& scheme) {
  const std::string s = citation_iri(rec.oci, scheme);
  std::vector<Triple> out;
  out.reserve(7);
  out.push_back({s, std::string(vocab::kRdfType), Term::iri(std::string(vocab::kCitation))});
  out.push_back({s, std::string(vocab::kHasCitingEntity), Term::iri(entity_iri(rec.citing, scheme))});
  out.push_back({s, std::string(vocab::kHasCitedEntity), Term::iri(entity_iri(rec.cited, scheme))});
  if (rec.creation)
    out.push_back({s, std::string(vocab::kHasCitationCreationDate),
                   Term::literal(rec.creation->to_string(), date_type(rec.creation->precision()))});
  if (rec.timespan)
    out.push_back({s, std::string(vocab::kHasCitationTimeSpan), Term::literal(format_duration(*rec.timespan), "duration")});
  if (rec.journal_sc) out.push_back({s, std::string(vocab::kRdfType), Term::iri(std::string(vocab::kJournalSelfCitation))});
  if (rec.author_sc) out.push_back({s, std::string(vocab::kRdfType), Term::iri(std::string(vocab::kAuthorSelfCitation))});
  return out;
}

std::vector<Triple> provenance_to_ntriples(const ProvenanceRecord& prov, const IriScheme& scheme) {
  const std::string s = citation_iri(prov.oci, scheme);
  return {
      {s, std::string(vocab::kWasAttributedTo), Term::iri(escape_iri(prov.agent))},
      {s, std::string(vocab::kHadPrimarySource), Term::iri(escape_iri(prov.source))},
      {s, std::string(vocab::kGeneratedAtTime), Term::literal(format_timestamp(prov.created_at), "dateTime")},
  };
}

std::string format_triple(const Triple& t) {
  std::string line;
  line.reserve(t.subject.size() + t.predicate.size() + t.object.value.size() + 64);
  line += '<';
  line += t.subject;
  line += "> <";
  line += t.predicate;
  line += "> ";
  if (t.object.kind == Term::Kind::Iri) {
    line += '<';
    line += t.object.value;
    line += '>';
  } else {
    line += '"';
    line += escape_literal(t.object.value);
    line += '"';
    if (!t.object.datatype.empty()) {
      line += "^^<";
      line += t.object.datatype;
      line += '>';
    }
  }
  line += " .\n";
  return line;
}

std::size_t write_ntriples(std::span<const Triple> triples, std::ostream& out) {
  for (const auto& t : triples) out << format_triple(t);
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "N-Triples write failed");
  return triples.size();
}

namespace {

template <typename Parse, typename Emit>
std::uint64_t convert(const fs::path& in_path, const fs::path& out_path, std::span<const std::string_view> columns,
                      Parse parse, Emit emit, std::uint64_t& corrupt, std::ostream* warnings) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot read " + in_path.string());
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "cannot write " + out_path.string());

  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) row.clear();
  check_header(row, columns);
  std::uint64_t triples = 0;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    try {
      triples += write_ntriples(emit(parse(row)), out);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CorruptRow) throw;
      ++corrupt;
      if (warnings) *warnings << in_path.filename().string() << " line " << reader.line() << ": " << e.what() << "\n";
    }
  }
  out.flush();
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "cannot write " + out_path.string());
  return triples;
}

}  // namespace

ExportReport export_rdf(const fs::path& csv_dir, const fs::path& out_dir, const IriScheme& scheme,
                        std::ostream* warnings) {
  scheme.validate();
  fs::create_directories(out_dir);
  ExportReport report;
  report.data_triples = convert(
      csv_dir / "citations.csv", out_dir / "citations.nt", kCitationColumns, parse_citation_row,
      [&](const CitationRecord& rec) {
        ++report.citations;
        return citation_to_ntriples(rec, scheme);
      },
      report.corrupt_rows, warnings);
  report.provenance_triples = convert(
      csv_dir / "provenance.csv", out_dir / "citations-prov.nt", kProvenanceColumns, parse_provenance_row,
      [&](const ProvenanceRecord& prov) {
        ++report.provenance_records;
        return provenance_to_ntriples(prov, scheme);
      },
      report.corrupt_rows, warnings);
  return report;
}

}  // namespace coci::rdf
