#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "coci/ingest.hpp"
#include "coci/model.hpp"

namespace coci {

// On-disk per-DOI side tables (*Dates*, *ISSN*, *ORCID*), backed by SQLite
// in `<dir>/aux.sqlite`.
//
// Date priority: a date taken from an indexed item replaces any date that
// came from a reference; between two indexed items the more precise date
// wins and ties keep the first; between references the first write wins.
class AuxStore {
 public:
  enum class Mode { Create, ReadOnly };

  // Create truncates any existing store in `dir`.
  static AuxStore open(const std::filesystem::path& dir, Mode mode);

  AuxStore(AuxStore&&) noexcept;
  AuxStore& operator=(AuxStore&&) noexcept;
  ~AuxStore();

  // Writes between begin() and commit() land atomically; rollback() drops them.
  void begin();
  void commit();
  void rollback();

  // Each put returns true when an existing different entry was involved
  // (a conflict the priority rules had to resolve).
  bool put_item_date(const std::string& doi, const PartialDate& date);
  bool put_reference_date(const std::string& doi, int year);
  void put_work(const std::string& doi, const std::optional<std::string>& pub_type);
  void put_issn(const std::string& doi, const std::string& issn);
  void put_orcid(const std::string& doi, const std::string& orcid);

  std::optional<PartialDate> date(const std::string& doi) const;
  std::set<std::string> issns(const std::string& doi) const;
  std::set<std::string> orcids(const std::string& doi) const;
  std::optional<std::string> pub_type(const std::string& doi) const;
  EntityAux entity(const std::string& doi) const;

  std::uint64_t date_count() const;
  std::uint64_t issn_count() const;   // DOIs with at least one ISSN
  std::uint64_t orcid_count() const;  // DOIs with at least one ORCID

  // dates.csv (doi,date), issn.csv (doi,issns,type), orcid.csv (doi,orcids);
  // rows sorted by DOI, multi-valued fields ';'-joined in sorted order.
  void export_csv(const std::filesystem::path& dir) const;
  void export_dates(std::ostream& out) const;
  void export_issn(std::ostream& out) const;
  void export_orcid(std::ostream& out) const;

 private:
  struct Impl;
  explicit AuxStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

struct IngestReport {
  std::uint64_t files = 0;
  std::uint64_t skipped_files = 0;
  std::uint64_t works = 0;
  std::uint64_t skipped_items = 0;  // items without a usable DOI
  std::uint64_t references = 0;
  std::uint64_t references_with_doi = 0;
  std::uint64_t date_entries = 0;
  std::uint64_t issn_entries = 0;
  std::uint64_t orcid_entries = 0;
  std::uint64_t conflicts_resolved = 0;
  std::uint64_t invalid_dates = 0;
  std::uint64_t invalid_issns = 0;
  std::uint64_t invalid_orcids = 0;
  std::uint64_t bytes_read = 0;
  std::vector<FileFailure> failures;

  // Flat JSON object of the counters.
  std::string to_json() const;
};

// DumpVisitor that feeds an AuxStore, one transaction per dump file.
class AuxBuilder : public DumpVisitor {
 public:
  explicit AuxBuilder(AuxStore& store) : store_(store) {}

  void begin_file(const std::filesystem::path&) override;
  void record(WorkRecord&& work) override;
  void commit_file(const std::filesystem::path&) override;
  void abort_file(const FileFailure&) override;

  // Adds the counts of committed files; scan totals come from `stats`.
  IngestReport report(const ScanStats& stats) const;

  // Applies one work outside any file bookkeeping.
  void apply(const WorkRecord& work);

 private:
  struct Counts {
    std::uint64_t works = 0, references = 0, references_with_doi = 0, conflicts = 0;
    std::uint64_t invalid_dates = 0, invalid_issns = 0, invalid_orcids = 0;
    void add(const Counts& o);
  };
  AuxStore& store_;
  Counts committed_;
  Counts pending_;
};

// Scans `dump` into a fresh store at `aux_dir`, exports the CSVs there and
// writes `ingest-report.json`.
IngestReport run_ingest(const std::filesystem::path& dump, const std::filesystem::path& aux_dir,
                        const ScanOptions& options = {});

}  // namespace coci
