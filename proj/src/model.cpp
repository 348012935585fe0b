#include "coci/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <tuple>

#include "coci/error.hpp"

namespace coci {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(int y, int m, int d) noexcept {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

struct Ymd {
  int y, m, d;
};

// Shifts `from` by whole months keeping its day number; a day past the end
// of the target month overflows into the following month (Jan 31 + 1 month
// is Mar 3 in a common year). Returned as days since the epoch.
long shift_months(Ymd from, int months) noexcept {
  const int index = from.y * 12 + (from.m - 1) + months;
  return days_from_civil(index / 12, index % 12 + 1, 1) + (from.d - 1);
}

long to_days(const Ymd& v) noexcept { return days_from_civil(v.y, v.m, v.d); }

bool parse_uint(std::string_view s, int& out) noexcept {
  if (s.empty() || s.size() > 9) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

bool is_leap_year(int year) noexcept { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) noexcept {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

// ---------------------------------------------------------------------------
// PartialDate

PartialDate::PartialDate(int year, std::optional<int> month, std::optional<int> day) : year_(year) {
  if (year < 1 || year > 9999) throw Error(ErrorKind::InvalidDate, "year out of range: " + std::to_string(year));
  if (day && !month) throw Error(ErrorKind::InvalidDate, "day without month");
  if (month) {
    if (*month < 1 || *month > 12) throw Error(ErrorKind::InvalidDate, "month out of range: " + std::to_string(*month));
    month_ = *month;
  }
  if (day) {
    if (*day < 1 || *day > days_in_month(year, month_))
      throw Error(ErrorKind::InvalidDate, "day out of range: " + std::to_string(*day));
    day_ = *day;
  }
}

DatePrecision PartialDate::precision() const noexcept {
  if (day_) return DatePrecision::Day;
  if (month_) return DatePrecision::Month;
  return DatePrecision::Year;
}

PartialDate PartialDate::truncated(DatePrecision p) const {
  switch (p) {
    case DatePrecision::Year: return PartialDate(year_);
    case DatePrecision::Month: return month_ ? PartialDate(year_, month_) : *this;
    case DatePrecision::Day: return *this;
  }
  return *this;
}

std::string PartialDate::to_string() const {
  char buf[16];
  if (day_) std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year_, month_, day_);
  else if (month_) std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
  else std::snprintf(buf, sizeof buf, "%04d", year_);
  return buf;
}

PartialDate parse_partial_date(std::span<const int> parts) {
  if (parts.empty()) throw Error(ErrorKind::InvalidDate, "empty date-parts");
  std::optional<int> month, day;
  if (parts.size() > 3) throw Error(ErrorKind::InvalidDate, "more than three date-parts");
  if (parts.size() >= 2 && parts[1] != 0) {
    month = parts[1];
    if (parts.size() == 3 && parts[2] != 0) day = parts[2];
  }
  return PartialDate(parts[0], month, day);
}

PartialDate parse_partial_date(std::string_view iso) {
  int parts[3] = {0, 0, 0};
  std::size_t n = 0;
  std::string_view rest = iso;
  static constexpr std::size_t kWidths[] = {4, 2, 2};
  while (true) {
    const auto dash = rest.find('-');
    const auto piece = rest.substr(0, dash);
    if (n == 3 || piece.size() != kWidths[n] || !parse_uint(piece, parts[n]))
      throw Error(ErrorKind::InvalidDate, "not an ISO date: \"" + std::string(iso) + "\"");
    ++n;
    if (dash == std::string_view::npos) break;
    rest.remove_prefix(dash + 1);
  }
  if ((n >= 2 && parts[1] == 0) || (n == 3 && parts[2] == 0))
    throw Error(ErrorKind::InvalidDate, "zero component in \"" + std::string(iso) + "\"");
  return parse_partial_date(std::span<const int>(parts, n));
}

// ---------------------------------------------------------------------------
// Timespan

Timespan Timespan::operator-() const noexcept {
  Timespan t = *this;
  t.negative = is_zero() ? false : !negative;
  return t;
}

Timespan compute_timespan(const PartialDate& citing, const PartialDate& cited) {
  const DatePrecision p = std::min(citing.precision(), cited.precision());
  const PartialDate a = citing.truncated(p);
  const PartialDate b = cited.truncated(p);
  const Ymd ca{a.year(), a.month().value_or(1), a.day().value_or(1)};
  const Ymd cb{b.year(), b.month().value_or(1), b.day().value_or(1)};

  const bool negative = std::tie(ca.y, ca.m, ca.d) < std::tie(cb.y, cb.m, cb.d);
  const Ymd& later = negative ? cb : ca;
  const Ymd& earlier = negative ? ca : cb;

  Timespan t;
  t.negative = negative;
  t.precision = p;
  int total_months = (later.y - earlier.y) * 12 + (later.m - earlier.m);
  switch (p) {
    case DatePrecision::Year:
      t.years = later.y - earlier.y;
      break;
    case DatePrecision::Month:
      t.years = total_months / 12;
      t.months = total_months % 12;
      break;
    case DatePrecision::Day: {
      // Field-wise subtraction borrowing the length of the month before the
      // later date's month, repeated while the day count is still negative.
      const long end = to_days(later);
      long anchor = shift_months(earlier, total_months);
      while (anchor > end) anchor = shift_months(earlier, --total_months);
      t.years = total_months / 12;
      t.months = total_months % 12;
      t.days = static_cast<int>(end - anchor);
      break;
    }
  }
  return t;
}

std::string format_duration(const Timespan& t) {
  if (t.is_zero()) return "P0Y";
  std::string out = t.negative ? "-P" : "P";
  if (t.years) out += std::to_string(t.years) + "Y";
  if (t.months) out += std::to_string(t.months) + "M";
  if (t.days) out += std::to_string(t.days) + "D";
  return out;
}

Timespan parse_duration(std::string_view text) {
  auto fail = [&]() -> Error {
    return Error(ErrorKind::MalformedDuration, "\"" + std::string(text) + "\"");
  };
  std::string_view rest = text;
  Timespan t;
  if (rest.starts_with('-')) {
    t.negative = true;
    rest.remove_prefix(1);
  }
  if (!rest.starts_with('P')) throw fail();
  rest.remove_prefix(1);
  if (rest.empty()) throw fail();

  static constexpr char kUnits[] = {'Y', 'M', 'D'};
  std::size_t next_unit = 0;
  while (!rest.empty()) {
    const auto unit_pos = rest.find_first_not_of("0123456789");
    if (unit_pos == 0 || unit_pos == std::string_view::npos) throw fail();
    int value = 0;
    if (!parse_uint(rest.substr(0, unit_pos), value)) throw fail();
    const char unit = rest[unit_pos];
    while (next_unit < 3 && kUnits[next_unit] != unit) ++next_unit;
    if (next_unit == 3) throw fail();
    switch (unit) {
      case 'Y': t.years = value; t.precision = DatePrecision::Year; break;
      case 'M': t.months = value; t.precision = DatePrecision::Month; break;
      case 'D': t.days = value; t.precision = DatePrecision::Day; break;
    }
    ++next_unit;
    rest.remove_prefix(unit_pos + 1);
  }
  t.years += t.months / 12;
  t.months %= 12;
  if (t.is_zero()) t.negative = false;
  return t;
}

// ---------------------------------------------------------------------------
// Identifiers

std::optional<std::string> normalize_issn(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    if (c == '-' || c == ' ') continue;
    s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (s.size() != 8) return std::nullopt;
  int sum = 0;
  for (int i = 0; i < 7; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    sum += (s[i] - '0') * (8 - i);
  }
  const int check = (11 - sum % 11) % 11;
  const char expected = check == 10 ? 'X' : static_cast<char>('0' + check);
  if (s[7] != expected) return std::nullopt;
  return s.substr(0, 4) + "-" + s.substr(4);
}

std::optional<std::string> normalize_orcid(std::string_view raw) {
  std::string_view v = raw;
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  for (std::string_view lead : {"https://orcid.org/", "http://orcid.org/", "orcid.org/"}) {
    if (v.starts_with(lead)) {
      v.remove_prefix(lead.size());
      break;
    }
  }
  std::string digits;
  for (char c : v) {
    if (c == '-') continue;
    digits.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (digits.size() != 16) return std::nullopt;
  if (v.size() == 19 && (v[4] != '-' || v[9] != '-' || v[14] != '-')) return std::nullopt;
  if (v.size() != 19 && v.size() != 16) return std::nullopt;
  int total = 0;
  for (int i = 0; i < 15; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(digits[i]))) return std::nullopt;
    total = (total + (digits[i] - '0')) * 2;
  }
  const int result = (12 - total % 11) % 11;
  const char expected = result == 10 ? 'X' : static_cast<char>('0' + result);
  if (digits[15] != expected) return std::nullopt;
  return digits.substr(0, 4) + "-" + digits.substr(4, 4) + "-" + digits.substr(8, 4) + "-" + digits.substr(12, 4);
}

// ---------------------------------------------------------------------------
// Timestamps and URLs

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  std::string_view s = text;
  if (s.ends_with('Z')) s.remove_suffix(1);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  const bool shape_ok = s.size() == 19 && s[4] == '-' && s[7] == '-' && s[10] == 'T' && s[13] == ':' &&
                        s[16] == ':' && parse_uint(s.substr(0, 4), y) && parse_uint(s.substr(5, 2), mo) &&
                        parse_uint(s.substr(8, 2), d) && parse_uint(s.substr(11, 2), h) &&
                        parse_uint(s.substr(14, 2), mi) && parse_uint(s.substr(17, 2), se);
  if (!shape_ok || h > 23 || mi > 59 || se > 59)
    throw Error(ErrorKind::InvalidDate, "not a UTC timestamp: \"" + std::string(text) + "\"");
  PartialDate date(y, mo, d);  // validates the calendar part
  using namespace std::chrono;
  return sys_days{std::chrono::days{days_from_civil(date.year(), mo, d)}} + hours{h} + minutes{mi} + seconds{se};
}

bool is_absolute_url(std::string_view url) noexcept {
  const auto colon = url.find("://");
  if (colon == std::string_view::npos || colon == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(url[0]))) return false;
  for (char c : url.substr(0, colon)) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
  }
  const auto authority = url.substr(colon + 3);
  return !authority.empty() && authority.front() != '/' && !std::isspace(static_cast<unsigned char>(authority.front()));
}

ProvenanceRecord make_provenance(Oci oci, std::string agent, std::string source, Timestamp created_at) {
  if (!is_absolute_url(source)) throw Error(ErrorKind::InvalidUrl, "provenance source \"" + source + "\"");
  if (!is_absolute_url(agent)) throw Error(ErrorKind::InvalidUrl, "provenance agent \"" + agent + "\"");
  return {std::move(oci), std::move(agent), std::move(source), created_at};
}

}  // namespace coci
