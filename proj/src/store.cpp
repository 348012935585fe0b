#include "coci/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <set>

#include "coci/build.hpp"
#include "coci/csv.hpp"
#include "sqlite.hpp"

namespace coci {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS citations (
  oci TEXT PRIMARY KEY, citing TEXT NOT NULL, cited TEXT NOT NULL, creation TEXT NOT NULL,
  timespan TEXT NOT NULL, journal_sc INTEGER NOT NULL, author_sc INTEGER NOT NULL) WITHOUT ROWID;
CREATE INDEX IF NOT EXISTS citations_by_citing ON citations (citing, cited);
CREATE INDEX IF NOT EXISTS citations_by_cited ON citations (cited, citing);
)sql";

constexpr const char* kColumns = "oci, citing, cited, creation, timespan, journal_sc, author_sc";

// Columns 0..6 of `stmt` in kColumns order.
CitationRecord record_at(const sqlite::Statement& stmt) {
  std::vector<std::string> row;
  row.reserve(7);
  for (int i = 0; i < 5; ++i) row.emplace_back(stmt.text(i));
  row.emplace_back(stmt.integer(5) ? "yes" : "no");
  row.emplace_back(stmt.integer(6) ? "yes" : "no");
  return parse_citation_row(row);
}

std::int64_t sql_limit(std::size_t n) {
  return n > static_cast<std::size_t>(std::numeric_limits<std::int64_t>::max()) ? -1 : static_cast<std::int64_t>(n);
}

std::string percent_text(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", share);
  return buf;
}

// SQL expression for the DOI prefix of column `col`, matching doi_prefix().
std::string prefix_expr(std::string_view col) {
  const std::string c(col);
  return "CASE instr(" + c + ", '/') WHEN 0 THEN " + c + " ELSE substr(" + c + ", 1, instr(" + c + ", '/') - 1) END";
}

}  // namespace

double share_percent(std::uint64_t count, std::uint64_t total) noexcept {
  if (total == 0) return 0.0;
  const auto permille = (static_cast<long double>(count) * 1000.0L) / static_cast<long double>(total);
  return static_cast<double>(std::llround(permille)) / 10.0;
}

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["citations"] = citations;
  j["entities"] = entities;
  j["journal_sc"] = journal_sc;
  j["journal_sc_share"] = journal_sc_share();
  j["author_sc"] = author_sc;
  j["author_sc_share"] = author_sc_share();
  j["with_timespan"] = with_timespan;
  j["without_timespan"] = without_timespan;
  return j.dump(2) + "\n";
}

std::string CorpusStats::to_text() const {
  const std::vector<std::pair<std::string, std::string>> lines = {
      {"citations", std::to_string(citations)},
      {"entities", std::to_string(entities)},
      {"journal self-citations", std::to_string(journal_sc) + " (" + percent_text(journal_sc_share()) + ")"},
      {"author self-citations", std::to_string(author_sc) + " (" + percent_text(author_sc_share()) + ")"},
      {"with timespan", std::to_string(with_timespan)},
      {"without timespan", std::to_string(without_timespan)},
  };
  std::size_t width = 0;
  for (const auto& [k, v] : lines) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : lines) out += k + std::string(width - k.size() + 2, ' ') + v + "\n";
  return out;
}

PrefixMap load_prefix_map(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot read " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row != std::vector<std::string>{"prefix", "label"})
    throw Error(ErrorKind::SchemaMismatch, path.string() + ": expected header prefix,label");
  PrefixMap map;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2 || row[1].empty())
      throw Error(ErrorKind::InvalidConfig, path.string() + " line " + std::to_string(reader.line()) + ": expected prefix,label");
    const auto prefix = try_normalize_doi(row[0]);
    if (!prefix || prefix->find('/') != std::string::npos)
      throw Error(ErrorKind::InvalidConfig, path.string() + ": not a DOI prefix: " + row[0]);
    if (!map.emplace(*prefix, row[1]).second)
      throw Error(ErrorKind::InvalidConfig, path.string() + ": duplicate prefix " + *prefix);
  }
  return map;
}

std::string PublisherStats::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["publisher"] = r.label;
    o["prefixes"] = r.prefixes;
    o["outgoing"] = r.outgoing;
    o["incoming"] = r.incoming;
    j.push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::string PublisherStats::to_text() const {
  std::vector<std::array<std::string, 4>> table = {{"publisher", "outgoing", "incoming", "prefixes"}};
  for (const auto& r : rows) {
    std::string prefixes;
    for (const auto& p : r.prefixes) prefixes += (prefixes.empty() ? "" : " ") + p;
    table.push_back({r.label, std::to_string(r.outgoing), std::to_string(r.incoming), prefixes});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& line : table)
    for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], line[i].size());
  std::string out;
  for (const auto& line : table) {
    std::string text = line[0] + std::string(width[0] - line[0].size(), ' ');
    for (std::size_t i = 1; i < 3; ++i) text += "  " + std::string(width[i] - line[i].size(), ' ') + line[i];
    text += "  " + line[3];
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Reader {
  sqlite::Database db;
  sqlite::Statement count_out, page_out, count_in, page_in, find;

  explicit Reader(const fs::path& file) : db(file, SQLITE_OPEN_READONLY, ErrorKind::UnreadableFile) {
    count_out = db.prepare("SELECT count(*) FROM citations WHERE citing = ?1");
    page_out = db.prepare(std::string("SELECT ") + kColumns +
                          " FROM citations WHERE citing = ?1 ORDER BY cited LIMIT ?2 OFFSET ?3");
    count_in = db.prepare("SELECT count(*) FROM citations WHERE cited = ?1");
    page_in = db.prepare(std::string("SELECT ") + kColumns +
                         " FROM citations WHERE cited = ?1 ORDER BY citing LIMIT ?2 OFFSET ?3");
    find = db.prepare(std::string("SELECT ") + kColumns + " FROM citations WHERE oci = ?1");
  }
};

// Runs `body` inside a read transaction so that multi-statement queries see
// one snapshot.
template <typename Body>
auto in_snapshot(Reader& r, Body body) {
  r.db.exec("BEGIN");
  try {
    auto result = body(r);
    r.db.exec("COMMIT");
    return result;
  } catch (...) {
    r.db.exec("ROLLBACK");
    throw;
  }
}

}  // namespace

struct CitationIndex::Impl {
  fs::path file;
  Mode mode;
  std::mutex pool_mutex;
  std::vector<std::unique_ptr<Reader>> idle;
  std::mutex load_mutex;

  class Lease {
   public:
    Lease(Impl& impl, std::unique_ptr<Reader> r) : impl_(impl), reader_(std::move(r)) {}
    ~Lease() {
      std::lock_guard lock(impl_.pool_mutex);
      impl_.idle.push_back(std::move(reader_));
    }
    Reader& operator*() { return *reader_; }

   private:
    Impl& impl_;
    std::unique_ptr<Reader> reader_;
  };

  Lease acquire() {
    {
      std::lock_guard lock(pool_mutex);
      if (!idle.empty()) {
        auto r = std::move(idle.back());
        idle.pop_back();
        return Lease(*this, std::move(r));
      }
    }
    return Lease(*this, std::make_unique<Reader>(file));
  }

  Page page(std::string_view doi, std::size_t offset, std::size_t limit, bool outgoing) {
    const auto key = try_normalize_doi(doi);
    if (!key) return {};
    auto lease = acquire();
    return in_snapshot(*lease, [&](Reader& r) {
      Page page;
      auto& count = outgoing ? r.count_out : r.count_in;
      count.reset().bind(1, *key);
      count.step();
      page.total = static_cast<std::uint64_t>(count.integer(0));
      count.reset();
      if (limit > 0 && offset < page.total) {
        auto& rows = outgoing ? r.page_out : r.page_in;
        rows.reset().bind(1, *key).bind(2, sql_limit(limit)).bind(3, sql_limit(offset));
        while (rows.step()) page.records.push_back(record_at(rows));
        rows.reset();
      }
      return page;
    });
  }
};

CitationIndex::CitationIndex(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
CitationIndex::CitationIndex(CitationIndex&&) noexcept = default;
CitationIndex& CitationIndex::operator=(CitationIndex&&) noexcept = default;
CitationIndex::~CitationIndex() = default;

CitationIndex CitationIndex::open(const fs::path& dir, Mode mode) {
  auto impl = std::make_unique<Impl>();
  impl->file = dir / "index.sqlite";
  impl->mode = mode;
  if (mode == Mode::ReadOnly) {
    if (!fs::exists(impl->file)) throw Error(ErrorKind::UnreadableFile, "no citation index at " + dir.string());
  } else {
    std::error_code ec;
    fs::create_directories(dir, ec);
    sqlite::Database db(impl->file, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, ErrorKind::StoreWriteFailure);
    db.exec("PRAGMA journal_mode = WAL");
    db.exec(kSchema);
  }
  // Fail early on a file that is not an index.
  impl->acquire();
  return CitationIndex(std::move(impl));
}

LoadReport CitationIndex::load(const std::vector<fs::path>& csv_files, std::ostream* warnings) {
  if (impl_->mode == Mode::ReadOnly) throw Error(ErrorKind::StoreWriteFailure, "index opened read-only");
  std::lock_guard exclusive(impl_->load_mutex);

  sqlite::Database db(impl_->file, SQLITE_OPEN_READWRITE, ErrorKind::StoreWriteFailure);
  auto select = db.prepare(std::string("SELECT ") + kColumns + " FROM citations WHERE oci = ?1");
  auto upsert = db.prepare(std::string("INSERT OR REPLACE INTO citations (") + kColumns +
                           ") VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");

  LoadReport report;
  db.exec("BEGIN IMMEDIATE");
  try {
    for (const auto& path : csv_files) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorKind::UnreadableFile, "cannot read " + path.string());
      csv::Reader reader(in);
      std::vector<std::string> row;
      if (!reader.next(row)) row.clear();
      check_header(row, kCitationColumns);
      while (reader.next(row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        std::optional<CitationRecord> parsed;
        try {
          parsed = parse_citation_row(row);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::CorruptRow) throw;
          ++report.corrupt;
          if (warnings) *warnings << path.filename().string() << " line " << reader.line() << ": " << e.what() << "\n";
          continue;
        }
        const CitationRecord& rec = *parsed;
        const auto canonical = citation_row(rec);
        select.reset().bind(1, canonical[0]);
        if (select.step()) {
          const bool same = record_at(select) == rec;
          select.reset();
          if (same) {
            ++report.unchanged;
            continue;
          }
          ++report.updated;
        } else {
          select.reset();
          ++report.inserted;
        }
        upsert.reset();
        for (int i = 0; i < 5; ++i) upsert.bind(i + 1, canonical[static_cast<std::size_t>(i)]);
        upsert.bind(6, std::int64_t{rec.journal_sc}).bind(7, std::int64_t{rec.author_sc}).run();
      }
    }
    db.exec("COMMIT");
  } catch (...) {
    if (db.in_transaction()) db.exec("ROLLBACK");
    throw;
  }
  db.exec("PRAGMA wal_checkpoint(PASSIVE)");
  return report;
}

Page CitationIndex::outgoing(std::string_view doi, std::size_t offset, std::size_t limit) const {
  return impl_->page(doi, offset, limit, true);
}

Page CitationIndex::incoming(std::string_view doi, std::size_t offset, std::size_t limit) const {
  return impl_->page(doi, offset, limit, false);
}

std::optional<CitationRecord> CitationIndex::by_oci(const Oci& oci) const {
  auto lease = impl_->acquire();
  auto& find = (*lease).find;
  find.reset().bind(1, format_oci(oci, OciForm::Bare));
  std::optional<CitationRecord> rec;
  if (find.step()) rec = record_at(find);
  find.reset();
  return rec;
}

CorpusStats CitationIndex::corpus_stats() const {
  auto lease = impl_->acquire();
  return in_snapshot(*lease, [](Reader& r) {
    CorpusStats s;
    auto totals = r.db.prepare(
        "SELECT count(*), coalesce(sum(journal_sc), 0), coalesce(sum(author_sc), 0), "
        "coalesce(sum(timespan <> ''), 0) FROM citations");
    totals.step();
    s.citations = static_cast<std::uint64_t>(totals.integer(0));
    s.journal_sc = static_cast<std::uint64_t>(totals.integer(1));
    s.author_sc = static_cast<std::uint64_t>(totals.integer(2));
    s.with_timespan = static_cast<std::uint64_t>(totals.integer(3));
    s.without_timespan = s.citations - s.with_timespan;
    auto entities = r.db.prepare("SELECT count(*) FROM (SELECT citing FROM citations UNION SELECT cited FROM citations)");
    entities.step();
    s.entities = static_cast<std::uint64_t>(entities.integer(0));
    return s;
  });
}

PublisherStats CitationIndex::publisher_stats(const PrefixMap& prefixes) const {
  struct Acc {
    std::set<std::string> prefixes;
    std::uint64_t outgoing = 0, incoming = 0;
  };
  std::map<std::string, Acc> by_label;

  auto lease = impl_->acquire();
  in_snapshot(*lease, [&](Reader& r) {
    for (const bool outgoing : {true, false}) {
      const std::string p = prefix_expr(outgoing ? "citing" : "cited");
      auto stmt = r.db.prepare("SELECT " + p + " AS p, count(*) FROM citations GROUP BY p");
      while (stmt.step()) {
        const std::string prefix(stmt.text(0));
        const auto it = prefixes.find(prefix);
        Acc& acc = by_label[it == prefixes.end() ? std::string(kOtherPublisher) : it->second];
        acc.prefixes.insert(prefix);
        (outgoing ? acc.outgoing : acc.incoming) += static_cast<std::uint64_t>(stmt.integer(1));
      }
    }
    return 0;
  });

  PublisherStats stats;
  for (auto& [label, acc] : by_label)
    stats.rows.push_back({label, {acc.prefixes.begin(), acc.prefixes.end()}, acc.outgoing, acc.incoming});
  std::stable_sort(stats.rows.begin(), stats.rows.end(),
                   [](const PublisherRow& a, const PublisherRow& b) { return a.total() > b.total(); });
  return stats;
}

}  // namespace coci
