// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <zlib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "calendar_oracle.hpp"
#include "coci/api.hpp"
#include "coci/build.hpp"
#include "coci/csv.hpp"
#include "coci/rdf.hpp"
#include "coci/store.hpp"
#include "spawn.hpp"
#include "stub_server.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace coci;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kExampleOci =
    "oci:02001010806360107050663080702026306630509-02001010806360107050663080702026305630301";

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

Timestamp fixed_time() { return parse_timestamp("2018-11-30T00:00:00Z"); }

// ---------------------------------------------------------------------------
// 1. OCI codec golden test

Outcome codec_golden() {
  const Oci oci = parse_oci(kExampleOci);
  const auto citing = decode_numeral(oci.citing());
  const auto cited = decode_numeral(oci.cited());
  for (const auto* d : {&citing, &cited}) {
    expect(d->supplier.digits == "020", "supplier is not Crossref");
    expect(d->identifier.starts_with("10."), "decoded DOI does not start with 10.");
    expect(normalize_doi(d->identifier) == d->identifier, "decoded DOI is not a normalized DOI");
  }
  const std::string again = format_oci(build_oci(citing.identifier, cited.identifier));
  expect(again == kExampleOci, "re-encoding differs: " + again);
  return {true, citing.identifier + " -> " + cited.identifier + ", re-encoded byte-for-byte"};
}

// ---------------------------------------------------------------------------
// 2. Codec property suite

Outcome codec_properties() {
  std::string charset;
  for (const auto& [c, code] : LookupTable::builtin().entries())
    if (!std::isspace(static_cast<unsigned char>(c)) && !std::isupper(static_cast<unsigned char>(c))) charset += c;

  std::mt19937_64 rng(20181130);
  std::set<std::string> dois;
  while (dois.size() < 10000) {
    std::string d = "10." + std::to_string(1000 + rng() % 9000) + "/";
    const std::size_t len = 1 + rng() % 30;
    for (std::size_t i = 0; i < len; ++i) d += charset[rng() % charset.size()];
    dois.insert(d);
  }
  std::unordered_map<std::string, std::string> seen;
  std::size_t failures = 0;
  for (const auto& d : dois) {
    const std::string numeral = encode_doi(d, crossref_supplier());
    if (decode_numeral(numeral).identifier != d) ++failures;
    const auto [it, fresh] = seen.emplace(numeral, d);
    if (!fresh && it->second != d) ++failures;
  }
  // OCI text round trip over random pairs.
  std::vector<std::string> list(dois.begin(), dois.end());
  for (int i = 0; i < 2000; ++i) {
    const auto& a = list[rng() % list.size()];
    const auto& b = list[rng() % list.size()];
    const Oci oci = build_oci(a, b);
    if (parse_oci(format_oci(oci)) != oci || parse_oci(format_oci(oci, OciForm::Bare)) != oci) ++failures;
  }
  expect(failures == 0, std::to_string(failures) + " failures");
  return {true, "10000 DOIs over " + std::to_string(charset.size()) + " characters, 2000 OCI pairs, 0 failures"};
}

// ---------------------------------------------------------------------------
// Synthetic citation corpus shared by criteria 3 and 7: 1000 citations with
// exactly 67 journal and 6 author self-citations and planted missing dates.

struct CitationCorpus {
  testing::TempDir dir{"coci-accept-corpus"};
  std::vector<CitationRecord> records;
};

CitationCorpus& citation_corpus() {
  static CitationCorpus c;
  if (!c.records.empty()) return c;
  {
    std::mt19937 rng(67);
    const std::vector<std::string> prefixes = {"10.1007", "10.1016", "10.1002", "10.1109", "10.1093", "10.5555", "10.9876"};
    std::set<std::pair<std::string, std::string>> pairs;
    while (c.records.size() < 1000) {
      const std::string a = prefixes[rng() % prefixes.size()] + "/p" + std::to_string(rng() % 400);
      const std::string b = prefixes[rng() % prefixes.size()] + "/p" + std::to_string(rng() % 400);
      if (!pairs.emplace(a, b).second) continue;
      const std::size_t i = c.records.size();
      CitationRecord r{build_oci(a, b), a, b, std::nullopt, std::nullopt, i % 15 == 3 && i < 1000 - 5, i % 150 == 7 && i < 900};
      if (i % 10 != 0) {
        r.creation = PartialDate(1990 + static_cast<int>(rng() % 30), 1 + static_cast<int>(rng() % 12));
        if (i % 7 != 0) r.timespan = compute_timespan(*r.creation, PartialDate(1980 + static_cast<int>(rng() % 10)));
      }
      c.records.push_back(std::move(r));
    }
    // Top up to exactly 67 journal self-citations.
    std::size_t journal = 0;
    for (const auto& r : c.records) journal += r.journal_sc;
    for (auto& r : c.records) {
      if (journal >= 67) break;
      if (!r.journal_sc) {
        r.journal_sc = true;
        ++journal;
      }
    }
    for (auto& r : c.records) {
      if (journal <= 67) break;
      if (r.journal_sc) {
        r.journal_sc = false;
        --journal;
      }
    }
    std::ofstream cit(c.dir / "citations.csv", std::ios::binary), prov(c.dir / "provenance.csv", std::ios::binary);
    emit_citations_csv(c.records, cit);
    std::vector<ProvenanceRecord> provenance;
    for (const auto& r : c.records)
      provenance.push_back(make_provenance(r.oci, "https://w3id.org/oc", instantiate_source(BuildConfig{}.source_url_template, r.citing), fixed_time()));
    emit_provenance_csv(provenance, prov);
  }
  return c;
}

// ---------------------------------------------------------------------------
// 3. Triple-count laws

Outcome triple_counts() {
  auto& corpus = citation_corpus();
  const auto report = rdf::export_rdf(corpus.dir.path(), corpus.dir / "rdf");
  std::map<std::string, std::size_t> data, prov;
  auto count_subjects = [](const fs::path& p, std::map<std::string, std::size_t>& into) {
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) ++into[line.substr(1, line.find('>') - 1)];
  };
  count_subjects(corpus.dir / "rdf" / "citations.nt", data);
  count_subjects(corpus.dir / "rdf" / "citations-prov.nt", prov);

  std::size_t mismatches = 0, full_plain = 0;
  for (const auto& r : corpus.records) {
    const std::string s = rdf::citation_iri(r.oci);
    const std::size_t expected = 5 + r.journal_sc + r.author_sc - !r.creation - !r.timespan;
    if (data[s] != expected) ++mismatches;
    if (prov[s] != 3) ++mismatches;
    if (r.creation && r.timespan && !r.journal_sc && !r.author_sc) {
      ++full_plain;
      if (data[s] != 5) ++mismatches;
    }
  }
  expect(data.size() == 1000 && prov.size() == 1000, "subject count differs from 1000");
  expect(mismatches == 0, std::to_string(mismatches) + " citations break the count laws");
  expect(report.provenance_triples == 3 * 1000, "provenance triples != 3 per citation");
  char buf[160];
  std::snprintf(buf, sizeof buf, "1000 citations, %llu data triples (%.2f/citation), %llu provenance triples, %zu plain full rows at 5",
                static_cast<unsigned long long>(report.data_triples), report.data_triples / 1000.0,
                static_cast<unsigned long long>(report.provenance_triples), full_plain);
  return {true, buf};
}

// ---------------------------------------------------------------------------
// 4. Pipeline versus brute-force oracle

struct SyntheticPipeline {
  testing::TempDir dir{"coci-accept-pipeline"};
  synth::Dump dump;
};

SyntheticPipeline& synthetic_pipeline() {
  static SyntheticPipeline p;
  return p;
}

Outcome pipeline_vs_oracle() {
  auto& p = synthetic_pipeline();
  p.dump = synth::generate({1000, 8, 10, 2018});
  synth::write(p.dump, p.dir / "dump");
  const auto ingest = run_ingest(p.dir / "dump", p.dir / "aux", ScanOptions{2, 64});
  BuildConfig config;
  config.run_timestamp = fixed_time();
  const auto build = run_build(p.dir / "dump", p.dir / "aux", p.dir / "csv", config, ScanOptions{2, 64});

  const auto expected = synth::oracle_rows(p.dump, synth::load_codes(fs::path(COCI_DATA_DIR) / "lookup_v1.csv"));
  std::ifstream in(p.dir / "csv" / "citations.csv", std::ios::binary);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> got;
  while (std::getline(in, line)) got.push_back(line);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < std::max(got.size(), expected.size()); ++i)
    if (i >= got.size() || i >= expected.size() || got[i] != expected[i].csv()) ++diff;
  std::size_t journal = 0, author = 0, no_date = 0;
  for (const auto& r : expected) {
    journal += r.journal_sc == "yes";
    author += r.author_sc == "yes";
    no_date += r.creation.empty();
  }
  expect(ingest.references >= 10000, "too few references: " + std::to_string(ingest.references));
  expect(journal > 0 && author > 0 && no_date > 0 && build.duplicates + build.unencodable > 0, "planted cases missing");
  expect(diff == 0, std::to_string(diff) + " rows differ from the oracle");
  return {true, std::to_string(ingest.works) + " works, " + std::to_string(ingest.references) + " references, " +
                    std::to_string(got.size()) + " citations identical (" + std::to_string(journal) + " journal sc, " +
                    std::to_string(author) + " author sc, " + std::to_string(no_date) + " without creation date)"};
}

// ---------------------------------------------------------------------------
// 5. Date-priority rule

Outcome date_priority() {
  // Indexed works at every precision; each is also cited by the others with
  // a wrong year, and some references point at DOIs that are never indexed.
  std::vector<json> items;
  std::map<std::string, std::string> indexed;
  std::mt19937 rng(5);
  for (int i = 0; i < 24; ++i) {
    const std::string doi = "10.4242/w" + std::to_string(i);
    json parts = json::array({1980 + i});
    if (i % 3 >= 1) parts.push_back(1 + i % 12);
    if (i % 3 == 2) parts.push_back(1 + i % 28);
    std::string text = std::to_string(1980 + i);
    if (parts.size() > 1) text += (i % 12 + 1 < 10 ? "-0" : "-") + std::to_string(i % 12 + 1);
    if (parts.size() > 2) text += (i % 28 + 1 < 10 ? "-0" : "-") + std::to_string(i % 28 + 1);
    indexed[doi] = text;
    json refs = json::array();
    for (int j = 0; j < 24; ++j)
      if (j != i) refs.push_back({{"DOI", "10.4242/w" + std::to_string(j)}, {"year", std::to_string(1900 + j + i)}});
    refs.push_back({{"DOI", "10.4242/ref-only"}, {"year", 1950 + i}});
    items.push_back({{"DOI", doi}, {"issued", {{"date-parts", json::array({parts})}}}, {"reference", refs}});
  }
  for (int round = 0; round < 100; ++round) {
    std::shuffle(items.begin(), items.end(), rng);
    testing::TempDir dir("coci-accept-priority");
    const std::size_t cut = rng() % items.size();
    testing::write_file(dir / "dump" / "a.json", json{{"items", json(std::vector<json>(items.begin(), items.begin() + static_cast<long>(cut)))}}.dump());
    testing::write_file(dir / "dump" / "b.json", json(std::vector<json>(items.begin() + static_cast<long>(cut), items.end())).dump());
    run_ingest(dir / "dump", dir / "aux");
    const auto store = AuxStore::open(dir / "aux", AuxStore::Mode::ReadOnly);
    for (const auto& [doi, date] : indexed) {
      const auto got = store.date(doi);
      expect(got && got->to_string() == date, "round " + std::to_string(round) + ": " + doi + " has " +
                                                   (got ? got->to_string() : std::string("no date")) + ", expected " + date);
    }
  }
  return {true, "24 indexed DOIs cited 23 times each with other years; indexed date kept in 100/100 shuffles"};
}

// ---------------------------------------------------------------------------
// 6. Timespan oracle

Outcome timespan_oracle() {
  std::mt19937_64 rng(6);
  auto random_date = [&](DatePrecision p) {
    int y = 1900 + static_cast<int>(rng() % 200), m = 1 + static_cast<int>(rng() % 12), d = 1;
    if (rng() % 5 == 0) {  // leap-year boundaries
      static const std::array<std::array<int, 3>, 6> edges = {{{2020, 2, 29}, {2020, 3, 1}, {2019, 2, 28}, {2021, 2, 28},
                                                               {2000, 2, 29}, {1900, 2, 28}}};
      const auto& e = edges[rng() % edges.size()];
      y = e[0];
      m = e[1];
      d = e[2];
    } else {
      d = 1 + static_cast<int>(rng() % static_cast<unsigned>(days_in_month(y, m)));
    }
    if (p == DatePrecision::Year) return PartialDate(y);
    if (p == DatePrecision::Month) return PartialDate(y, m);
    return PartialDate(y, m, d);
  };
  std::size_t failures = 0, exact_days = 0, leap_pairs = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto pa = static_cast<DatePrecision>(1 + rng() % 3), pb = static_cast<DatePrecision>(1 + rng() % 3);
    const PartialDate a = random_date(pa), b = random_date(pb);
    const Timespan t = compute_timespan(a, b);
    if (!(compute_timespan(b, a) == -t)) ++failures;
    if (!compute_timespan(a, a).is_zero()) ++failures;
    const auto p = std::min(a.precision(), b.precision());
    if (p == DatePrecision::Day) {
      ++exact_days;
      if ((a.month() == 2 && a.day() == 29) || (b.month() == 2 && b.day() == 29)) ++leap_pairs;
      const auto o = oracle::difference({a.year(), *a.month(), *a.day()}, {b.year(), *b.month(), *b.day()});
      const bool zero = o.years == 0 && o.months == 0 && o.days == 0;
      if (t.years != o.years || t.months != o.months || t.days != o.days || (!zero && t.negative != o.negative)) ++failures;
    } else if (p == DatePrecision::Month) {
      const int months = (a.year() * 12 + *a.month()) - (b.year() * 12 + *b.month());
      if (t.years * 12 + t.months != std::abs(months) || t.days != 0 || (months != 0 && t.negative != (months < 0))) ++failures;
    } else {
      const int years = a.year() - b.year();
      if (t.years != std::abs(years) || t.months != 0 || t.days != 0 || (years != 0 && t.negative != (years < 0))) ++failures;
    }
  }
  expect(failures == 0, std::to_string(failures) + " failures");
  return {true, "10000 pairs, " + std::to_string(exact_days) + " day-exact against the calendar oracle (" +
                    std::to_string(leap_pairs) + " on Feb 29), 0 failures"};
}

// ---------------------------------------------------------------------------
// 7. Statistics conservation

Outcome statistics() {
  auto& corpus = citation_corpus();
  auto index = CitationIndex::open(corpus.dir / "index");
  index.load({corpus.dir / "citations.csv"});
  const auto s = index.corpus_stats();
  const auto pubs = index.publisher_stats(load_prefix_map(fs::path(COCI_DATA_DIR) / "publishers.csv"));
  std::uint64_t out = 0, in = 0;
  for (const auto& r : pubs.rows) {
    out += r.outgoing;
    in += r.incoming;
  }
  expect(out == s.citations && in == s.citations, "publisher sums " + std::to_string(out) + "/" + std::to_string(in) +
                                                      " differ from " + std::to_string(s.citations));
  expect(s.citations == 1000, "index holds " + std::to_string(s.citations) + " citations");
  expect(s.journal_sc == 67 && s.journal_sc_share() == 6.7, "journal self-citation share is not 6.7%");
  expect(s.author_sc == 6 && s.author_sc_share() == 0.6, "author self-citation share is not 0.6%");
  char buf[200];
  std::snprintf(buf, sizeof buf, "sum outgoing = sum incoming = %llu over %zu publisher rows; journal sc %.1f%%, author sc %.1f%%",
                static_cast<unsigned long long>(s.citations), pubs.rows.size(), s.journal_sc_share(), s.author_sc_share());
  return {true, buf};
}

// ---------------------------------------------------------------------------
// 8. API conformance sweep

Outcome api_sweep() {
  const fs::path fixture = fs::path(COCI_FIXTURE_DIR) / "index" / "citations.csv";
  testing::TempDir dir("coci-accept-api");
  CitationIndex::open(dir / "index").load({fixture});
  testing::StubWorksServer stub;

  ApiConfig config;
  config.port = 0;
  config.index = dir / "index";
  config.metadata_mode = MetadataMode::Off;
  config.metadata_base_url = stub.base_url();
  ApiServer server(config);
  const int port = server.bind();
  std::jthread thread([&] { server.run(); });
  server.wait_until_ready();
  struct Stop {
    ApiServer& s;
    ~Stop() { s.stop(); }
  } stop{server};

  httplib::Client client("127.0.0.1", port);
  auto get = [&](const std::string& path, const httplib::Headers& headers = {}) {
    auto r = client.Get(path, headers);
    expect(static_cast<bool>(r), "no response for " + path);
    return r;
  };
  auto get_json = [&](const std::string& path) {
    auto r = get(path);
    expect(r->status == 200, path + " answered " + std::to_string(r->status));
    return json::parse(r->body);
  };

  std::ifstream in(fixture, std::ios::binary);
  csv::Reader reader(in);
  std::vector<std::string> row;
  reader.next(row);
  std::size_t rows = 0;
  while (reader.next(row)) {
    ++rows;
    json expected;
    for (std::size_t i = 0; i < row.size(); ++i) expected[std::string(kCitationColumns[i])] = row[i];
    const auto refs = get_json("/references/" + row[1]);
    const auto cites = get_json("/citations/" + row[2]);
    expect(std::count(refs.begin(), refs.end(), expected) == 1, row[0] + " not exactly once in /references");
    expect(std::count(cites.begin(), cites.end(), expected) == 1, row[0] + " not exactly once in /citations");
    expect(get_json("/citation/" + row[0]) == expected, "/citation/" + row[0] + " differs from the CSV row");
  }
  const auto nt = get(std::string("/ci/") + std::string(kExampleOci).substr(4), {{"Accept", "application/n-triples"}});
  const auto lines = std::count(nt->body.begin(), nt->body.end(), '\n');
  expect(nt->status == 200 && lines == 5, "direct access returned " + std::to_string(lines) + " N-Triples lines");

  const auto meta = get_json("/metadata/10.1186/1756-8722-6-59__10.1000/x");
  expect(meta.size() == 2 && meta[0]["reference_count"] == "1" && meta[0]["citation_count"] == "0" &&
             meta[1]["citation_count"] == "3" && meta[0]["title"] == "",
         "metadata counts wrong: " + meta.dump());
  expect(stub.calls().empty(), "outbound metadata calls in off mode");
  return {true, std::to_string(rows) + " citations swept over 3 routes; /ci example has 5 N-Triples lines; metadata off mode made 0 outbound calls"};
}

// ---------------------------------------------------------------------------
// 9. Output validity under third-party readers

Outcome output_validity() {
  auto& p = synthetic_pipeline();
  if (!fs::exists(p.dir / "csv" / "citations.csv")) pipeline_vs_oracle();
  rdf::export_rdf(p.dir / "csv", p.dir / "rdf");
  const auto r = testing::run_child({COCI_PYTHON, COCI_SCRIPTS_DIR "/validate_outputs.py", (p.dir / "csv").string(),
                                     (p.dir / "rdf").string()},
                                    p.dir / "validate");
  std::string summary = r.out;
  std::replace(summary.begin(), summary.end(), '\n', ';');
  expect(r.exit_code == 0, "validator exit " + std::to_string(r.exit_code) + ": " + r.err);
  return {true, "rdflib and python csv accept all outputs: " + summary};
}

// ---------------------------------------------------------------------------
// 10. Streaming bound

// Lean gzip dump: `works` items spread over files of 2000 items each.
// Returns the uncompressed size.
std::uint64_t write_lean_dump(const fs::path& dir, int works) {
  fs::create_directories(dir);
  constexpr int kPerFile = 2000;
  std::uint64_t bytes = 0;
  std::mt19937 rng(static_cast<unsigned>(works));
  std::string buf;
  for (int start = 0, file = 0; start < works; start += kPerFile, ++file) {
    char name[32];
    std::snprintf(name, sizeof name, "part-%05d.json.gz", file);
    gzFile gz = gzopen((dir / name).c_str(), "wb1");
    buf = "{\"message\":{\"items\":[";
    for (int i = start; i < std::min(works, start + kPerFile); ++i) {
      char item[512];
      const unsigned r = rng();
      const int n = std::snprintf(
          item, sizeof item,
          "%s{\"DOI\":\"10.%04u/w%07d\",\"type\":\"journal-article\",\"issued\":{\"date-parts\":[[%u,%u,%u]]},"
          "\"ISSN\":[\"%s\"],\"author\":[{\"family\":\"A\"%s}],\"reference\":[{\"DOI\":\"10.%04u/w%07u\",\"year\":\"%u\"},"
          "{\"DOI\":\"10.%04u/w%07u\"},{\"unstructured\":\"x\"}]}",
          i == start ? "" : ",", 1000 + r % 50, i, 1950 + r % 70, 1 + r % 12, 1 + r % 28, synth::make_issn(static_cast<int>(r % 97)).c_str(),
          r % 4 == 0 ? ",\"ORCID\":\"https://orcid.org/0000-0002-1825-0097\"" : "", 1000 + (r >> 8) % 50,
          (r >> 3) % static_cast<unsigned>(works), 1940 + (r >> 5) % 80, 1000 + (r >> 12) % 50, (r >> 7) % static_cast<unsigned>(works));
      buf.append(item, static_cast<std::size_t>(n));
    }
    buf += "]}}";
    gzwrite(gz, buf.data(), static_cast<unsigned>(buf.size()));
    gzclose(gz);
    bytes += buf.size();
  }
  return bytes;
}

Outcome streaming_bound() {
  testing::TempDir dir("coci-accept-stream");
  struct Run {
    long rss_kb;
    std::uint64_t bytes, bytes_read, works;
  };
  auto run = [&](int works) {
    const fs::path base = dir / ("n" + std::to_string(works));
    const std::uint64_t bytes = write_lean_dump(base / "dump", works);
    const auto child = testing::run_child({COCI_CLI, "ingest", "--dump", (base / "dump").string(), "--aux", (base / "aux").string()}, base);
    expect(child.exit_code == 0, "ingest of " + std::to_string(works) + " works failed: " + child.err);
    const auto report = json::parse(testing::read_file(base / "aux" / "ingest-report.json"));
    Run r{child.max_rss_kb, bytes, report.at("bytes_read").get<std::uint64_t>(), report.at("works").get<std::uint64_t>()};
    std::error_code ec;
    fs::remove_all(base, ec);
    return r;
  };
  const Run small = run(10000);
  const Run large = run(1000000);
  expect(small.works == 10000 && large.works == 1000000, "work counts differ from the dumps");
  expect(small.bytes_read == small.bytes && large.bytes_read == large.bytes, "bytes read differ from dump size (not a single pass)");
  const double ratio = static_cast<double>(large.rss_kb) / static_cast<double>(small.rss_kb);
  char buf[200];
  std::snprintf(buf, sizeof buf, "peak RSS %ld KiB at 1e4 works, %ld KiB at 1e6 works (ratio %.2f, limit 2); %llu MB read once",
                small.rss_kb, large.rss_kb, ratio, static_cast<unsigned long long>(large.bytes_read >> 20));
  expect(ratio <= 2.0, buf);
  return {true, buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "OCI codec golden test", 1, codec_golden},
      {2, "codec property suite", 5, codec_properties},
      {3, "triple-count laws", 5, triple_counts},
      {4, "pipeline vs oracle equivalence", 30, pipeline_vs_oracle},
      {5, "date-priority rule", 5, date_priority},
      {6, "timespan oracle", 5, timespan_oracle},
      {7, "statistics conservation", 5, statistics},
      {8, "API conformance sweep", 30, api_sweep},
      {9, "output validity", 10, output_validity},
      {10, "streaming bound", 600, streaming_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs >= c.limit_s) {
      o.pass = false;
      o.detail += "; over the time limit";
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %-32s %8.2f s (limit %g s)  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
