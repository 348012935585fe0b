#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "coci/oci.hpp"

namespace coci {

enum class DatePrecision { Year = 1, Month = 2, Day = 3 };

// Proleptic Gregorian date known to year, month or day precision.
class PartialDate {
 public:
  // Throws Error(InvalidDate) if a supplied component is out of range or a
  // day is given without a month.
  explicit PartialDate(int year, std::optional<int> month = std::nullopt, std::optional<int> day = std::nullopt);

  int year() const noexcept { return year_; }
  std::optional<int> month() const noexcept { return month_ ? std::optional<int>(month_) : std::nullopt; }
  std::optional<int> day() const noexcept { return day_ ? std::optional<int>(day_) : std::nullopt; }
  DatePrecision precision() const noexcept;

  // Drops components finer than `p`; a no-op when already coarser.
  PartialDate truncated(DatePrecision p) const;

  // "YYYY", "YYYY-MM" or "YYYY-MM-DD".
  std::string to_string() const;

  bool operator==(const PartialDate&) const = default;

 private:
  int year_;
  int month_ = 0;  // 0 = absent
  int day_ = 0;    // 0 = absent
};

bool is_leap_year(int year) noexcept;
int days_in_month(int year, int month) noexcept;

// Date-parts as found in Crossref metadata. A zero month or day truncates the
// date there; an empty list or an invalid year throws Error(InvalidDate).
PartialDate parse_partial_date(std::span<const int> parts);
// "YYYY", "YYYY-MM" or "YYYY-MM-DD".
PartialDate parse_partial_date(std::string_view iso);

/// Signed calendar interval with year, month or day resolution.
///
/// Components finer than `precision` are always zero. Equality compares the
/// signed value only: the text form cannot carry the precision, so "P1Y" at
/// year and at day precision are the same duration.
struct Timespan {
  bool negative = false;
  int years = 0;
  int months = 0;  // 0..11
  int days = 0;
  DatePrecision precision = DatePrecision::Year;

  bool is_zero() const noexcept { return years == 0 && months == 0 && days == 0; }
  Timespan operator-() const noexcept;

  friend bool operator==(const Timespan& a, const Timespan& b) noexcept {
    return a.negative == b.negative && a.years == b.years && a.months == b.months && a.days == b.days;
  }
};

// citing − cited, after truncating both dates to their coarsest common
// precision. Day differences count whole months forward from the earlier
// date (clamping to month ends) and then the remaining days.
Timespan compute_timespan(const PartialDate& citing, const PartialDate& cited);

// ISO 8601 form: "P1Y2M10D", "-P3M"; zero components are omitted and a zero
// duration is "P0Y".
std::string format_duration(const Timespan& t);
// Inverse of format_duration over the Y/M/D subset. Months are normalized
// into years. Throws Error(MalformedDuration).
Timespan parse_duration(std::string_view text);

// "NNNN-NNNC" with a valid mod-11 check character, or nullopt.
std::optional<std::string> normalize_issn(std::string_view raw);
// Bare 19-character ORCID with a valid ISO 7064 11,2 check character, or
// nullopt. URL forms ("https://orcid.org/...") are accepted.
std::optional<std::string> normalize_orcid(std::string_view raw);

using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DDThh:mm:ssZ"
std::string format_timestamp(Timestamp t);
// Accepts the format_timestamp form, with or without the trailing 'Z'.
Timestamp parse_timestamp(std::string_view text);

bool is_absolute_url(std::string_view url) noexcept;

// One citation as a data entity.
struct CitationRecord {
  Oci oci;
  std::string citing;
  std::string cited;
  std::optional<PartialDate> creation;
  std::optional<Timespan> timespan;
  bool journal_sc = false;
  bool author_sc = false;

  bool operator==(const CitationRecord&) const = default;
};

struct ProvenanceRecord {
  Oci oci;
  std::string agent;
  std::string source;
  Timestamp created_at;

  bool operator==(const ProvenanceRecord&) const = default;
};

// Throws Error(InvalidUrl) unless `source` is an absolute URL.
ProvenanceRecord make_provenance(Oci oci, std::string agent, std::string source, Timestamp created_at);

// Per-DOI side data gathered while scanning the dump.
struct EntityAux {
  std::string doi;
  std::optional<PartialDate> pub_date;
  std::set<std::string> issns;
  std::set<std::string> orcids;
  std::optional<std::string> pub_type;
};

}  // namespace coci
