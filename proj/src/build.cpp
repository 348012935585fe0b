#include "coci/build.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "coci/csv.hpp"
#include "sqlite.hpp"

namespace coci {

namespace fs = std::filesystem;

namespace {

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else return true;
  }
  return false;
}

bool parse_flag(const std::string& v) {
  if (v == "yes") return true;
  if (v == "no") return false;
  throw Error(ErrorKind::CorruptRow, "flag must be yes or no, got '" + v + "'");
}

std::string checked_doi(const std::string& v, const char* column) {
  auto doi = try_normalize_doi(v);
  if (!doi || *doi != v) throw Error(ErrorKind::CorruptRow, std::string(column) + " is not a normalized DOI: " + v);
  return *doi;
}

void check_sink(std::ostream& out) {
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "write failed");
}

}  // namespace

std::string instantiate_source(std::string_view url_template, std::string_view doi) {
  static constexpr std::string_view kSlot = "{doi}";
  std::string out;
  std::size_t pos = 0;
  for (std::size_t hit; (hit = url_template.find(kSlot, pos)) != std::string_view::npos; pos = hit + kSlot.size()) {
    out.append(url_template.substr(pos, hit - pos));
    out.append(doi);
  }
  out.append(url_template.substr(pos));
  return out;
}

std::vector<GeneratedCitation> generate_citations(const WorkRecord& work, const AuxStore& aux,
                                                  const BuildConfig& config, const SkipLog& log) {
  std::vector<GeneratedCitation> out;
  const auto citing_date = aux.date(work.doi);
  std::optional<std::set<std::string>> citing_issns, citing_orcids;  // fetched on first use
  const std::string source = instantiate_source(config.source_url_template, work.doi);

  std::unordered_set<std::string_view> seen;
  for (const auto& ref : work.references) {
    if (!ref.doi || !seen.insert(*ref.doi).second) continue;
    const std::string& cited = *ref.doi;
    std::optional<Oci> oci;
    try {
      oci = build_oci(work.doi, cited);
    } catch (const Error& e) {
      if (log) log(work.doi + " -> " + cited + ": " + e.what());
      continue;
    }
    if (!citing_issns) {
      citing_issns = aux.issns(work.doi);
      citing_orcids = aux.orcids(work.doi);
    }
    CitationRecord rec{*oci, work.doi, cited, citing_date, std::nullopt, false, false};
    if (citing_date) {
      if (const auto cited_date = aux.date(cited)) rec.timespan = compute_timespan(*citing_date, *cited_date);
    }
    rec.journal_sc = !citing_issns->empty() && intersects(*citing_issns, aux.issns(cited));
    rec.author_sc = !citing_orcids->empty() && intersects(*citing_orcids, aux.orcids(cited));
    out.push_back({rec, make_provenance(*oci, config.agent_iri, source, config.run_timestamp)});
  }
  return out;
}

std::vector<std::string> citation_row(const CitationRecord& rec) {
  return {format_oci(rec.oci, OciForm::Bare),
          rec.citing,
          rec.cited,
          rec.creation ? rec.creation->to_string() : std::string(),
          rec.timespan ? format_duration(*rec.timespan) : std::string(),
          rec.journal_sc ? "yes" : "no",
          rec.author_sc ? "yes" : "no"};
}

std::vector<std::string> provenance_row(const ProvenanceRecord& rec) {
  return {format_oci(rec.oci, OciForm::Bare), rec.agent, rec.source, format_timestamp(rec.created_at)};
}

CitationRecord parse_citation_row(const std::vector<std::string>& row) {
  if (row.size() != kCitationColumns.size())
    throw Error(ErrorKind::CorruptRow, "expected 7 fields, got " + std::to_string(row.size()));
  try {
    CitationRecord rec{parse_oci(row[0]), checked_doi(row[1], "citing"), checked_doi(row[2], "cited"),
                       std::nullopt, std::nullopt, parse_flag(row[5]), parse_flag(row[6])};
    if (!row[3].empty()) rec.creation = parse_partial_date(std::string_view(row[3]));
    if (!row[4].empty()) rec.timespan = parse_duration(row[4]);
    return rec;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptRow) throw;
    throw Error(ErrorKind::CorruptRow, std::string(e.detail()));
  }
}

ProvenanceRecord parse_provenance_row(const std::vector<std::string>& row) {
  if (row.size() != kProvenanceColumns.size())
    throw Error(ErrorKind::CorruptRow, "expected 4 fields, got " + std::to_string(row.size()));
  try {
    return make_provenance(parse_oci(row[0]), row[1], row[2], parse_timestamp(row[3]));
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptRow, std::string(e.detail()));
  }
}

void check_header(const std::vector<std::string>& header, std::span<const std::string_view> expected) {
  if (!std::equal(header.begin(), header.end(), expected.begin(), expected.end())) {
    std::string want;
    for (auto c : expected) want += (want.empty() ? "" : ",") + std::string(c);
    throw Error(ErrorKind::SchemaMismatch, "expected header " + want);
  }
}

void emit_citations_csv(std::span<const CitationRecord> records, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>(kCitationColumns.begin(), kCitationColumns.end()));
  for (const auto& r : records) csv::write_row(out, citation_row(r));
  check_sink(out);
}

void emit_provenance_csv(std::span<const ProvenanceRecord> records, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>(kProvenanceColumns.begin(), kProvenanceColumns.end()));
  for (const auto& r : records) csv::write_row(out, provenance_row(r));
  check_sink(out);
}

namespace {

// Collects rows in a scratch SQLite table keyed by (citing, cited): the key
// drops repeated pairs and its order is the output order.
class CitationSink : public DumpVisitor {
 public:
  CitationSink(const fs::path& scratch, const AuxStore& aux, const BuildConfig& config, const SkipLog& log,
               BuildReport& report)
      : db_(scratch, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, ErrorKind::StoreWriteFailure),
        aux_(aux),
        config_(config),
        log_(log),
        report_(report) {
    db_.exec(
        "PRAGMA journal_mode = MEMORY; PRAGMA synchronous = OFF;"
        "CREATE TABLE rows (citing TEXT NOT NULL, cited TEXT NOT NULL, oci TEXT NOT NULL, creation TEXT NOT NULL,"
        " timespan TEXT NOT NULL, journal_sc INTEGER NOT NULL, author_sc INTEGER NOT NULL,"
        " PRIMARY KEY (citing, cited)) WITHOUT ROWID;");
    insert_ = db_.prepare("INSERT OR IGNORE INTO rows (oci, citing, cited, creation, timespan, journal_sc, author_sc) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
  }

  void begin_file(const fs::path&) override {
    pending_ = {};
    db_.exec("BEGIN");
  }

  void record(WorkRecord&& work) override {
    ++pending_.works;
    auto skip = [&](const std::string& msg) {
      ++pending_.unencodable;
      if (log_) log_(msg);
    };
    for (const auto& g : generate_citations(work, aux_, config_, skip)) {
      const auto row = citation_row(g.citation);
      insert_.reset();
      for (int i = 0; i < 5; ++i) insert_.bind(i + 1, row[static_cast<std::size_t>(i)]);
      insert_.bind(6, std::int64_t{g.citation.journal_sc}).bind(7, std::int64_t{g.citation.author_sc}).run();
      if (db_.changes() == 0) {
        ++pending_.duplicates;
      } else if (g.citation.citing == g.citation.cited) {
        ++pending_.self_citations;
      }
    }
  }

  void commit_file(const fs::path&) override {
    db_.exec("COMMIT");
    report_.works += pending_.works;
    report_.duplicates += pending_.duplicates;
    report_.self_citations += pending_.self_citations;
    report_.unencodable += pending_.unencodable;
  }

  void abort_file(const FileFailure&) override { db_.exec("ROLLBACK"); }

  void write(std::ostream& citations, std::ostream& provenance) {
    csv::write_row(citations, std::vector<std::string>(kCitationColumns.begin(), kCitationColumns.end()));
    csv::write_row(provenance, std::vector<std::string>(kProvenanceColumns.begin(), kProvenanceColumns.end()));
    const std::string created = format_timestamp(config_.run_timestamp);
    auto s = db_.prepare("SELECT oci, citing, cited, creation, timespan, journal_sc, author_sc FROM rows ORDER BY citing, cited");
    while (s.step()) {
      csv::write_row(citations, {s.text(0), s.text(1), s.text(2), s.text(3), s.text(4),
                                 s.integer(5) ? "yes" : "no", s.integer(6) ? "yes" : "no"});
      const std::string source = instantiate_source(config_.source_url_template, s.text(1));
      csv::write_row(provenance, {s.text(0), config_.agent_iri, source, created});
      ++report_.citations;
    }
    check_sink(citations);
    check_sink(provenance);
  }

 private:
  struct Counts {
    std::uint64_t works = 0, duplicates = 0, self_citations = 0, unencodable = 0;
  };
  sqlite::Database db_;
  sqlite::Statement insert_;
  const AuxStore& aux_;
  const BuildConfig& config_;
  const SkipLog& log_;
  BuildReport& report_;
  Counts pending_;
};

}  // namespace

BuildReport run_build(const fs::path& dump, const fs::path& aux_dir, const fs::path& out_dir,
                      const BuildConfig& config, const ScanOptions& options, const SkipLog& log) {
  if (!is_absolute_url(instantiate_source(config.source_url_template, "10.0/0")))
    throw Error(ErrorKind::InvalidConfig, "source URL template is not an absolute URL: " + config.source_url_template);
  if (!is_absolute_url(config.agent_iri))
    throw Error(ErrorKind::InvalidConfig, "agent IRI is not absolute: " + config.agent_iri);
  list_dump_files(dump);
  const auto aux = AuxStore::open(aux_dir, AuxStore::Mode::ReadOnly);

  fs::create_directories(out_dir);
  const fs::path scratch = out_dir / ".build-scratch.sqlite";
  std::error_code ec;
  fs::remove(scratch, ec);

  BuildReport report;
  {
    CitationSink sink(scratch, aux, config, log, report);
    const auto stats = scan_dump(dump, sink, options);
    report.files = stats.files;
    report.skipped_files = stats.skipped_files;
    report.failures = stats.failures;

    std::ofstream citations(out_dir / "citations.csv", std::ios::binary);
    std::ofstream provenance(out_dir / "provenance.csv", std::ios::binary);
    if (!citations || !provenance) throw Error(ErrorKind::SinkWriteFailure, "cannot write to " + out_dir.string());
    sink.write(citations, provenance);
  }
  fs::remove(scratch, ec);
  return report;
}

}  // namespace coci
