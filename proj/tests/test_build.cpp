#include <doctest.h>

#include <sstream>

#include "coci/build.hpp"
#include "coci/csv.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

using namespace coci;
using testing::read_file;
using testing::TempDir;

namespace {

const std::filesystem::path kFixtures(COCI_FIXTURE_DIR);
constexpr const char* kExampleOci =
    "02001010806360107050663080702026306630509-02001010806360107050663080702026305630301";

WorkRecord work(std::string doi, std::vector<int> issued, std::vector<std::string> issns = {},
                std::vector<std::string> orcids = {}, std::vector<ReferenceEntry> refs = {}) {
  WorkRecord w;
  w.doi = std::move(doi);
  w.issued = std::move(issued);
  w.issns = std::move(issns);
  w.orcids = std::move(orcids);
  w.references = std::move(refs);
  return w;
}

BuildConfig fixed_config() {
  BuildConfig c;
  c.run_timestamp = parse_timestamp("2018-11-30T00:00:00Z");
  return c;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  csv::Reader reader(in);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  while (reader.next(row)) rows.push_back(row);
  return rows;
}

struct Planted {
  TempDir dir;
  AuxStore store = AuxStore::open(dir.path(), AuxStore::Mode::Create);
  AuxBuilder builder{store};
};

}  // namespace

TEST_CASE("generate_citations on the worked example") {
  Planted p;
  const auto citing = work("10.1186/1756-8722-6-59", {2013}, {"1756-8722"}, {},
                           {{"10.1186/1756-8722-5-31", 2012}, {std::nullopt, 1999}});
  p.builder.apply(citing);
  p.builder.apply(work("10.1186/1756-8722-5-31", {2012}, {"1756-8722"}));

  const auto out = generate_citations(citing, p.store, fixed_config());
  REQUIRE(out.size() == 1);
  const CitationRecord& c = out[0].citation;
  CHECK(format_oci(c.oci, OciForm::Bare) == kExampleOci);
  CHECK(c.creation == PartialDate(2013));
  CHECK(format_duration(*c.timespan) == "P1Y");
  CHECK(c.journal_sc);
  CHECK_FALSE(c.author_sc);

  const ProvenanceRecord& prov = out[0].provenance;
  CHECK(prov.oci == c.oci);
  CHECK(prov.agent == "https://w3id.org/oc");
  CHECK(prov.source == "https://api.crossref.org/works/10.1186/1756-8722-6-59");
  CHECK(format_timestamp(prov.created_at) == "2018-11-30T00:00:00Z");

  std::ostringstream os;
  std::vector<CitationRecord> recs{c};
  emit_citations_csv(recs, os);
  CHECK(os.str() ==
        "oci,citing,cited,creation,timespan,journal_sc,author_sc\n"
        "02001010806360107050663080702026306630509-02001010806360107050663080702026305630301,"
        "10.1186/1756-8722-6-59,10.1186/1756-8722-5-31,2013,P1Y,yes,no\n");
}

TEST_CASE("author self-citation through a shared ORCID") {
  Planted p;
  const auto citing = work("10.1/a", {2020}, {"1756-8722"}, {"https://orcid.org/0000-0003-0530-4305"},
                           {{"10.1/b", std::nullopt}});
  p.builder.apply(citing);
  p.builder.apply(work("10.1/b", {}, {"2434-561X"}, {"0000-0003-0530-4305"}));
  const auto out = generate_citations(citing, p.store, fixed_config());
  REQUIRE(out.size() == 1);
  CHECK(out[0].citation.author_sc);
  CHECK_FALSE(out[0].citation.journal_sc);
  // Unknown cited date: creation present, timespan absent.
  CHECK(out[0].citation.creation == PartialDate(2020));
  CHECK_FALSE(out[0].citation.timespan);
  CHECK(citation_row(out[0].citation)[4].empty());
  CHECK(citation_row(out[0].citation)[3] == "2020");
}

TEST_CASE("references without a DOI, repeated DOIs and unencodable DOIs") {
  Planted p;
  const auto citing = work("10.1/a", {}, {}, {},
                           {{std::nullopt, 2000}, {"10.1/b", 2001}, {"10.1/b", 2001}, {"10.1/bad doi", 2000}, {"10.1/c", {}}});
  p.builder.apply(citing);
  std::vector<std::string> log;
  const auto out = generate_citations(citing, p.store, fixed_config(), [&](const std::string& m) { log.push_back(m); });
  REQUIRE(out.size() == 2);
  CHECK(out[0].citation.cited == "10.1/b");
  CHECK(out[1].citation.cited == "10.1/c");
  CHECK_FALSE(out[0].citation.creation);
  CHECK_FALSE(out[0].citation.timespan);
  REQUIRE(log.size() == 1);
  CHECK(log[0].find("10.1/bad doi") != std::string::npos);
}

TEST_CASE("empty record list gives a header-only file") {
  std::ostringstream a, b;
  emit_citations_csv({}, a);
  emit_provenance_csv({}, b);
  CHECK(a.str() == "oci,citing,cited,creation,timespan,journal_sc,author_sc\n");
  CHECK(b.str() == "oci,agent,source,created\n");
}

TEST_CASE("row parsing") {
  const CitationRecord rec{build_oci("10.1/a,b", "10.1/c"), "10.1/a,b", "10.1/c", PartialDate(2001, 2),
                           parse_duration("-P3M"), true, false};
  CHECK(parse_citation_row(citation_row(rec)) == rec);
  CHECK(citation_row(rec)[1] == "10.1/a,b");

  auto bad = citation_row(rec);
  for (auto [col, value] : std::vector<std::pair<int, std::string>>{
           {0, "oci:1-2-3"}, {1, "10.1/A"}, {3, "2001-13"}, {4, "P1W"}, {5, "true"}}) {
    auto row = bad;
    row[static_cast<std::size_t>(col)] = value;
    CHECK_THROWS_WITH_AS(parse_citation_row(row), doctest::Contains("CorruptRow"), Error);
  }
  CHECK_THROWS_AS(parse_citation_row({"a", "b"}), Error);

  const auto prov = make_provenance(rec.oci, "https://w3id.org/oc", "https://x.org/a b", parse_timestamp("2020-01-01T00:00:00Z"));
  CHECK(parse_provenance_row(provenance_row(prov)) == prov);
  CHECK_THROWS_AS(parse_provenance_row({"1-2", "agent", "not a url", "2020-01-01T00:00:00Z"}), Error);

  std::vector<std::string> header(kCitationColumns.begin(), kCitationColumns.end());
  CHECK_NOTHROW(check_header(header, kCitationColumns));
  header[4] = "span";
  try {
    check_header(header, kCitationColumns);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaMismatch);
  }
}

TEST_CASE("instantiate_source") {
  CHECK(instantiate_source("https://api.crossref.org/works/{doi}", "10.1/x") == "https://api.crossref.org/works/10.1/x");
  CHECK(instantiate_source("https://h/{doi}?again={doi}", "d") == "https://h/d?again=d");
  CHECK(instantiate_source("https://h/", "d") == "https://h/");
}

TEST_CASE("run_build on the fixture dump matches the golden files") {
  TempDir dir;
  run_ingest(kFixtures / "dump", dir / "aux");
  std::vector<std::string> log;
  const auto report = run_build(kFixtures / "dump", dir / "aux", dir / "out", fixed_config(), {},
                                [&](const std::string& m) { log.push_back(m); });
  CHECK(report.works == 6);
  CHECK(report.citations == 10);
  CHECK(report.unencodable == 1);
  CHECK(report.duplicates == 0);
  CHECK(log.size() == 1);
  CHECK(read_file(dir / "out" / "citations.csv") == read_file(kFixtures / "golden" / "citations.csv"));
  CHECK(read_file(dir / "out" / "provenance.csv") == read_file(kFixtures / "golden" / "provenance.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "out" / ".build-scratch.sqlite"));

  // Flag soundness and the creation-date law, row by row against the aux data.
  const auto aux = AuxStore::open(dir / "aux", AuxStore::Mode::ReadOnly);
  const auto rows = read_rows(dir / "out" / "citations.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto rec = parse_citation_row(rows[i]);
    std::set<std::string> common;
    const auto a = aux.issns(rec.citing), b = aux.issns(rec.cited);
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(common, common.end()));
    CHECK(rec.journal_sc == !common.empty());
    common.clear();
    const auto c = aux.orcids(rec.citing), d = aux.orcids(rec.cited);
    std::set_intersection(c.begin(), c.end(), d.begin(), d.end(), std::inserter(common, common.end()));
    CHECK(rec.author_sc == !common.empty());
    const auto date = aux.date(rec.citing);
    CHECK(rows[i][3] == (date ? date->to_string() : ""));
  }
}

TEST_CASE("run-level dedup and self-citations") {
  TempDir dir;
  testing::write_file(dir / "dump" / "a.json", R"({"items": [
      {"DOI": "10.1/a", "reference": [{"DOI": "10.1/b"}, {"DOI": "10.1/a"}]},
      {"DOI": "10.1/A", "reference": [{"DOI": "10.1/b"}, {"DOI": "10.1/c"}]}]})");
  run_ingest(dir / "dump", dir / "aux");
  const auto r = run_build(dir / "dump", dir / "aux", dir / "out", fixed_config());
  CHECK(r.citations == 3);
  CHECK(r.duplicates == 1);
  CHECK(r.self_citations == 1);
  const auto rows = read_rows(dir / "out" / "citations.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][2] == "10.1/a");
  CHECK(rows[2][2] == "10.1/b");
  CHECK(rows[3][2] == "10.1/c");
}

TEST_CASE("invalid configuration") {
  TempDir dir;
  BuildConfig c = fixed_config();
  c.source_url_template = "api/{doi}";
  CHECK_THROWS_AS(run_build(kFixtures / "dump", dir / "aux", dir / "out", c), Error);
}

TEST_CASE("pipeline agrees with the brute-force reference on a synthetic dump") {
  for (unsigned seed : {3u, 11u}) {
    CAPTURE(seed);
    TempDir dir;
    const auto dump = synth::generate({300, 5, 8, seed});
    synth::write(dump, dir / "dump");
    run_ingest(dir / "dump", dir / "aux");
    run_build(dir / "dump", dir / "aux", dir / "out", fixed_config(), ScanOptions{2, 16});

    std::vector<std::string> expected;
    for (const auto& row : synth::oracle_rows(dump, synth::load_codes(std::string(COCI_DATA_DIR) + "/lookup_v1.csv")))
      expected.push_back(row.csv());
    std::istringstream actual(read_file(dir / "out" / "citations.csv"));
    std::string line;
    std::getline(actual, line);
    std::vector<std::string> got;
    while (std::getline(actual, line)) got.push_back(line);
    CHECK(expected.size() > 1000);
    CHECK(got.size() == expected.size());
    CHECK(got == expected);
  }
}
