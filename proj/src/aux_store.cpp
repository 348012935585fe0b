#include "coci/aux_store.hpp"

#include <fstream>
#include <json.hpp>

#include "coci/csv.hpp"
#include "sqlite.hpp"

namespace coci {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE dates (doi TEXT PRIMARY KEY, date TEXT NOT NULL, precision INTEGER NOT NULL,
                    indexed INTEGER NOT NULL) WITHOUT ROWID;
CREATE TABLE works (doi TEXT PRIMARY KEY, type TEXT) WITHOUT ROWID;
CREATE TABLE issns (doi TEXT NOT NULL, issn TEXT NOT NULL, PRIMARY KEY (doi, issn)) WITHOUT ROWID;
CREATE TABLE orcids (doi TEXT NOT NULL, orcid TEXT NOT NULL, PRIMARY KEY (doi, orcid)) WITHOUT ROWID;
)sql";

std::string join_column(sqlite::Statement& stmt, const std::string& doi) {
  std::string out;
  stmt.reset().bind(1, doi);
  while (stmt.step()) {
    if (!out.empty()) out.push_back(';');
    out.append(stmt.text(0));
  }
  return out;
}

}  // namespace

struct AuxStore::Impl {
  sqlite::Database db;
  sqlite::Statement insert_date, update_item_date, select_date;
  sqlite::Statement insert_work, insert_issn, insert_orcid;
  sqlite::Statement select_type, select_issns, select_orcids;

  explicit Impl(sqlite::Database database) : db(std::move(database)) {
    select_date = db.prepare("SELECT date, indexed FROM dates WHERE doi = ?1");
    select_type = db.prepare("SELECT type FROM works WHERE doi = ?1");
    select_issns = db.prepare("SELECT issn FROM issns WHERE doi = ?1 ORDER BY issn");
    select_orcids = db.prepare("SELECT orcid FROM orcids WHERE doi = ?1 ORDER BY orcid");
  }

  void prepare_writers() {
    insert_date = db.prepare("INSERT OR IGNORE INTO dates (doi, date, precision, indexed) VALUES (?1, ?2, ?3, ?4)");
    update_item_date = db.prepare(
        "UPDATE dates SET date = ?2, precision = ?3, indexed = 1 "
        "WHERE doi = ?1 AND (indexed = 0 OR precision < ?3)");
    insert_work = db.prepare("INSERT OR IGNORE INTO works (doi, type) VALUES (?1, ?2)");
    insert_issn = db.prepare("INSERT OR IGNORE INTO issns (doi, issn) VALUES (?1, ?2)");
    insert_orcid = db.prepare("INSERT OR IGNORE INTO orcids (doi, orcid) VALUES (?1, ?2)");
  }

  std::uint64_t count(const char* sql) const {
    auto stmt = db.prepare(sql);
    stmt.step();
    return static_cast<std::uint64_t>(stmt.integer(0));
  }
};

AuxStore::AuxStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
AuxStore::AuxStore(AuxStore&&) noexcept = default;
AuxStore& AuxStore::operator=(AuxStore&&) noexcept = default;
AuxStore::~AuxStore() = default;

AuxStore AuxStore::open(const fs::path& dir, Mode mode) {
  const fs::path file = dir / "aux.sqlite";
  if (mode == Mode::ReadOnly) {
    if (!fs::exists(file)) throw Error(ErrorKind::UnreadableFile, "no aux store at " + dir.string());
    auto impl = std::make_unique<Impl>(sqlite::Database(file, SQLITE_OPEN_READONLY, ErrorKind::UnreadableFile));
    return AuxStore(std::move(impl));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const char* suffix : {"", "-wal", "-shm", "-journal"}) fs::remove(file.string() + suffix, ec);
  sqlite::Database db(file, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, ErrorKind::StoreWriteFailure);
  db.exec("PRAGMA journal_mode = WAL; PRAGMA synchronous = OFF;");
  db.exec(kSchema);
  auto impl = std::make_unique<Impl>(std::move(db));
  impl->prepare_writers();
  return AuxStore(std::move(impl));
}

void AuxStore::begin() { impl_->db.exec("BEGIN"); }
void AuxStore::commit() { impl_->db.exec("COMMIT"); }
void AuxStore::rollback() {
  if (impl_->db.in_transaction()) impl_->db.exec("ROLLBACK");
}

bool AuxStore::put_item_date(const std::string& doi, const PartialDate& date) {
  const auto text = date.to_string();
  const auto precision = static_cast<std::int64_t>(date.precision());
  impl_->insert_date.reset().bind(1, doi).bind(2, text).bind(3, precision).bind(4, std::int64_t{1}).run();
  if (impl_->db.changes() > 0) return false;
  auto& s = impl_->select_date;
  s.reset().bind(1, doi);
  const bool differs = s.step() && s.text(0) != text;
  s.reset();
  impl_->update_item_date.reset().bind(1, doi).bind(2, text).bind(3, precision).run();
  return differs;
}

bool AuxStore::put_reference_date(const std::string& doi, int year) {
  const auto text = PartialDate(year).to_string();
  impl_->insert_date.reset().bind(1, doi).bind(2, text).bind(3, std::int64_t{1}).bind(4, std::int64_t{0}).run();
  if (impl_->db.changes() > 0) return false;
  auto& s = impl_->select_date;
  s.reset().bind(1, doi);
  const bool differs = s.step() && s.text(0) != text;
  s.reset();
  return differs;
}

void AuxStore::put_work(const std::string& doi, const std::optional<std::string>& pub_type) {
  auto& s = impl_->insert_work.reset().bind(1, doi);
  if (pub_type) s.bind(2, *pub_type);
  s.run();
}

void AuxStore::put_issn(const std::string& doi, const std::string& issn) {
  impl_->insert_issn.reset().bind(1, doi).bind(2, issn).run();
}

void AuxStore::put_orcid(const std::string& doi, const std::string& orcid) {
  impl_->insert_orcid.reset().bind(1, doi).bind(2, orcid).run();
}

std::optional<PartialDate> AuxStore::date(const std::string& doi) const {
  auto& s = impl_->select_date;
  s.reset().bind(1, doi);
  std::optional<PartialDate> out;
  if (s.step()) out = parse_partial_date(s.text(0));
  s.reset();
  return out;
}

std::set<std::string> AuxStore::issns(const std::string& doi) const {
  std::set<std::string> out;
  auto& s = impl_->select_issns;
  s.reset().bind(1, doi);
  while (s.step()) out.emplace(s.text(0));
  return out;
}

std::set<std::string> AuxStore::orcids(const std::string& doi) const {
  std::set<std::string> out;
  auto& s = impl_->select_orcids;
  s.reset().bind(1, doi);
  while (s.step()) out.emplace(s.text(0));
  return out;
}

std::optional<std::string> AuxStore::pub_type(const std::string& doi) const {
  auto& s = impl_->select_type;
  s.reset().bind(1, doi);
  std::optional<std::string> out;
  if (s.step() && !s.is_null(0)) out = std::string(s.text(0));
  s.reset();
  return out;
}

EntityAux AuxStore::entity(const std::string& doi) const {
  return EntityAux{doi, date(doi), issns(doi), orcids(doi), pub_type(doi)};
}

std::uint64_t AuxStore::date_count() const { return impl_->count("SELECT COUNT(*) FROM dates"); }
std::uint64_t AuxStore::issn_count() const { return impl_->count("SELECT COUNT(DISTINCT doi) FROM issns"); }
std::uint64_t AuxStore::orcid_count() const { return impl_->count("SELECT COUNT(DISTINCT doi) FROM orcids"); }

void AuxStore::export_dates(std::ostream& out) const {
  csv::write_row(out, {"doi", "date"});
  auto s = impl_->db.prepare("SELECT doi, date FROM dates ORDER BY doi");
  while (s.step()) csv::write_row(out, {s.text(0), s.text(1)});
}

void AuxStore::export_issn(std::ostream& out) const {
  csv::write_row(out, {"doi", "issns", "type"});
  auto s = impl_->db.prepare(
      "SELECT doi, type FROM works WHERE type IS NOT NULL OR doi IN (SELECT doi FROM issns) ORDER BY doi");
  while (s.step()) {
    const std::string doi(s.text(0));
    const std::string type(s.text(1));
    csv::write_row(out, {doi, join_column(impl_->select_issns, doi), type});
  }
}

void AuxStore::export_orcid(std::ostream& out) const {
  csv::write_row(out, {"doi", "orcids"});
  auto s = impl_->db.prepare("SELECT DISTINCT doi FROM orcids ORDER BY doi");
  while (s.step()) {
    const std::string doi(s.text(0));
    csv::write_row(out, {doi, join_column(impl_->select_orcids, doi)});
  }
}

void AuxStore::export_csv(const fs::path& dir) const {
  auto write = [&](const char* name, void (AuxStore::*fn)(std::ostream&) const) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::SinkWriteFailure, "cannot write " + (dir / name).string());
    (this->*fn)(out);
    out.flush();
    if (!out) throw Error(ErrorKind::SinkWriteFailure, "cannot write " + (dir / name).string());
  };
  write("dates.csv", &AuxStore::export_dates);
  write("issn.csv", &AuxStore::export_issn);
  write("orcid.csv", &AuxStore::export_orcid);
}

std::string IngestReport::to_json() const {
  nlohmann::ordered_json j;
  j["files"] = files;
  j["skipped_files"] = skipped_files;
  j["works"] = works;
  j["skipped_items"] = skipped_items;
  j["references"] = references;
  j["references_with_doi"] = references_with_doi;
  j["date_entries"] = date_entries;
  j["issn_entries"] = issn_entries;
  j["orcid_entries"] = orcid_entries;
  j["conflicts_resolved"] = conflicts_resolved;
  j["invalid_dates"] = invalid_dates;
  j["invalid_issns"] = invalid_issns;
  j["invalid_orcids"] = invalid_orcids;
  j["bytes_read"] = bytes_read;
  return j.dump(2) + "\n";
}

void AuxBuilder::Counts::add(const Counts& o) {
  works += o.works;
  references += o.references;
  references_with_doi += o.references_with_doi;
  conflicts += o.conflicts;
  invalid_dates += o.invalid_dates;
  invalid_issns += o.invalid_issns;
  invalid_orcids += o.invalid_orcids;
}

void AuxBuilder::begin_file(const fs::path&) {
  pending_ = {};
  store_.begin();
}

void AuxBuilder::record(WorkRecord&& work) { apply(work); }

void AuxBuilder::commit_file(const fs::path&) {
  store_.commit();
  committed_.add(pending_);
  pending_ = {};
}

void AuxBuilder::abort_file(const FileFailure&) {
  store_.rollback();
  pending_ = {};
}

void AuxBuilder::apply(const WorkRecord& work) {
  Counts& c = pending_;
  ++c.works;
  store_.put_work(work.doi, work.pub_type);
  if (!work.issued.empty()) {
    try {
      c.conflicts += store_.put_item_date(work.doi, parse_partial_date(std::span<const int>(work.issued)));
    } catch (const Error&) {
      ++c.invalid_dates;
    }
  }
  for (const auto& raw : work.issns) {
    if (auto issn = normalize_issn(raw)) store_.put_issn(work.doi, *issn);
    else ++c.invalid_issns;
  }
  for (const auto& raw : work.orcids) {
    if (auto orcid = normalize_orcid(raw)) store_.put_orcid(work.doi, *orcid);
    else ++c.invalid_orcids;
  }
  for (const auto& ref : work.references) {
    ++c.references;
    if (!ref.doi) continue;
    ++c.references_with_doi;
    if (!ref.year) continue;
    if (*ref.year < 1 || *ref.year > 9999) {
      ++c.invalid_dates;
      continue;
    }
    c.conflicts += store_.put_reference_date(*ref.doi, *ref.year);
  }
}

IngestReport AuxBuilder::report(const ScanStats& stats) const {
  Counts c = committed_;
  c.add(pending_);
  IngestReport r;
  r.files = stats.files;
  r.skipped_files = stats.skipped_files;
  r.skipped_items = stats.items_without_doi;
  r.bytes_read = stats.bytes_read;
  r.failures = stats.failures;
  r.works = c.works;
  r.references = c.references;
  r.references_with_doi = c.references_with_doi;
  r.conflicts_resolved = c.conflicts;
  r.invalid_dates = c.invalid_dates;
  r.invalid_issns = c.invalid_issns;
  r.invalid_orcids = c.invalid_orcids;
  r.date_entries = store_.date_count();
  r.issn_entries = store_.issn_count();
  r.orcid_entries = store_.orcid_count();
  return r;
}

IngestReport run_ingest(const fs::path& dump, const fs::path& aux_dir, const ScanOptions& options) {
  list_dump_files(dump);  // fail before touching aux_dir when the dump is missing
  auto store = AuxStore::open(aux_dir, AuxStore::Mode::Create);
  AuxBuilder builder(store);
  ScanStats stats;
  try {
    stats = scan_dump(dump, builder, options);
  } catch (...) {
    store.rollback();
    throw;
  }
  auto report = builder.report(stats);
  store.export_csv(aux_dir);
  std::ofstream out(aux_dir / "ingest-report.json", std::ios::binary);
  out << report.to_json();
  out.flush();
  if (!out) throw Error(ErrorKind::SinkWriteFailure, "cannot write ingest-report.json");
  return report;
}

}  // namespace coci
