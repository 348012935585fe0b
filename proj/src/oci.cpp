#include "coci/oci.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coci/csv.hpp"
#include "coci/error.hpp"

namespace coci {

namespace {

constexpr std::string_view kDoiLeadIn = "10.";

// Punctuation beyond '/' and '-' gets codes 37.. in this order, skipping 63.
constexpr std::string_view kPunctuation = "._()[]:;<>+#%&*,=?@!\"$'\\^`{|}~";

bool is_digits(std::string_view s) noexcept {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string printable(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
  std::ostringstream os;
  os << "byte 0x" << std::hex << static_cast<int>(u);
  return os.str();
}

}  // namespace

std::optional<std::string> try_normalize_doi(std::string_view doi) {
  std::string out(trim(doi));
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  });
  if (out.size() <= kDoiLeadIn.size() || !out.starts_with(kDoiLeadIn)) return std::nullopt;
  return out;
}

std::string normalize_doi(std::string_view doi) {
  auto out = try_normalize_doi(doi);
  if (!out) throw Error(ErrorKind::MalformedDoi, "not a DOI: \"" + std::string(doi) + "\"");
  return *std::move(out);
}

std::string_view doi_prefix(std::string_view doi) noexcept {
  return doi.substr(0, doi.find('/'));
}

// ---------------------------------------------------------------------------
// LookupTable

LookupTable::LookupTable() {
  to_code_.fill(-1);
  to_char_.fill(-1);
}

void LookupTable::insert(char c, int code) {
  const auto u = static_cast<unsigned char>(c);
  if (code < 0 || code > 99) throw Error(ErrorKind::InvalidConfig, "lookup code out of range");
  if (to_code_[u] >= 0) throw Error(ErrorKind::InvalidConfig, "duplicate lookup character " + printable(c));
  if (to_char_[code] >= 0) throw Error(ErrorKind::InvalidConfig, "duplicate lookup code " + std::to_string(code));
  to_code_[u] = static_cast<std::int16_t>(code);
  to_char_[code] = static_cast<std::int16_t>(u);
  ++size_;
}

const LookupTable& LookupTable::builtin() {
  static const LookupTable table = [] {
    LookupTable t;
    for (int d = 0; d < 10; ++d) t.insert(static_cast<char>('0' + d), d);
    for (int l = 0; l < 26; ++l) t.insert(static_cast<char>('a' + l), 10 + l);
    t.insert('/', 36);
    t.insert('-', 63);
    int code = 37;
    for (char c : kPunctuation) {
      if (code == 63) ++code;
      t.insert(c, code++);
    }
    return t;
  }();
  return table;
}

LookupTable LookupTable::from_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row.size() != 2 || row[0] != "c" || row[1] != "code")
    throw Error(ErrorKind::InvalidConfig, "lookup table header must be \"c,code\"");
  LookupTable t;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2 || row[0].size() != 1 || row[1].size() != 2 || !is_digits(row[1]))
      throw Error(ErrorKind::InvalidConfig, "bad lookup row at line " + std::to_string(reader.line()));
    t.insert(row[0][0], (row[1][0] - '0') * 10 + (row[1][1] - '0'));
  }
  return t;
}

LookupTable LookupTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, path.string());
  return from_csv(in);
}

std::optional<std::array<char, 2>> LookupTable::code(char c) const noexcept {
  const int code = to_code_[static_cast<unsigned char>(c)];
  if (code < 0) return std::nullopt;
  return std::array<char, 2>{static_cast<char>('0' + code / 10), static_cast<char>('0' + code % 10)};
}

std::optional<char> LookupTable::character(char tens, char units) const noexcept {
  if (tens < '0' || tens > '9' || units < '0' || units > '9') return std::nullopt;
  const int c = to_char_[(tens - '0') * 10 + (units - '0')];
  if (c < 0) return std::nullopt;
  return static_cast<char>(c);
}

std::vector<std::pair<char, std::string>> LookupTable::entries() const {
  std::vector<std::pair<char, std::string>> out;
  out.reserve(size_);
  for (int code = 0; code < 100; ++code) {
    if (to_char_[code] < 0) continue;
    const char digits[2] = {static_cast<char>('0' + code / 10), static_cast<char>('0' + code % 10)};
    out.emplace_back(static_cast<char>(to_char_[code]), std::string(digits, 2));
  }
  return out;
}

void LookupTable::write_csv(std::ostream& out) const {
  csv::write_row(out, {"c", "code"});
  for (const auto& [c, code] : entries()) csv::write_row(out, {std::string_view(&c, 1), code});
}

// ---------------------------------------------------------------------------
// SupplierRegistry

SupplierRegistry::SupplierRegistry(std::vector<SupplierPrefix> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!is_digits(e.digits) || e.digits.back() != '0')
      throw Error(ErrorKind::InvalidConfig, "supplier prefix must be digits ending in '0': \"" + e.digits + "\"");
  }
  for (const auto& a : entries_) {
    for (const auto& b : entries_) {
      if (&a != &b && b.digits.starts_with(a.digits))
        throw Error(ErrorKind::InvalidConfig, "supplier prefix " + a.digits + " is a prefix of " + b.digits);
    }
  }
}

const SupplierRegistry& SupplierRegistry::builtin() {
  static const SupplierRegistry registry({
      {"020", "Crossref", IdScheme::Doi},
      {"030", "OpenCitations Corpus", IdScheme::LocalId},
  });
  return registry;
}

SupplierRegistry SupplierRegistry::from_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row != std::vector<std::string>{"digits", "name", "scheme"})
    throw Error(ErrorKind::InvalidConfig, "supplier registry header must be \"digits,name,scheme\"");
  std::vector<SupplierPrefix> entries;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 3 || (row[2] != "doi" && row[2] != "local"))
      throw Error(ErrorKind::InvalidConfig, "bad supplier row at line " + std::to_string(reader.line()));
    entries.push_back({row[0], row[1], row[2] == "doi" ? IdScheme::Doi : IdScheme::LocalId});
  }
  return SupplierRegistry(std::move(entries));
}

SupplierRegistry SupplierRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, path.string());
  return from_csv(in);
}

const SupplierPrefix* SupplierRegistry::find(std::string_view digits) const noexcept {
  for (const auto& e : entries_)
    if (e.digits == digits) return &e;
  return nullptr;
}

const SupplierPrefix* SupplierRegistry::match(std::string_view numeral) const noexcept {
  for (const auto& e : entries_)
    if (numeral.starts_with(e.digits)) return &e;
  return nullptr;
}

const SupplierPrefix& crossref_supplier() { return *SupplierRegistry::builtin().find("020"); }

// ---------------------------------------------------------------------------
// Oci

Oci::Oci(std::string citing, std::string cited) : citing_(std::move(citing)), cited_(std::move(cited)) {
  if (!is_digits(citing_) || !is_digits(cited_))
    throw Error(ErrorKind::MalformedOci, "numerals must be non-empty digit strings: \"" + citing_ + "-" + cited_ + "\"");
}

std::string encode_doi(std::string_view doi, const SupplierPrefix& supplier, const LookupTable& table) {
  const std::string normalized = normalize_doi(doi);
  const std::string_view body = std::string_view(normalized).substr(kDoiLeadIn.size());
  std::string out;
  out.reserve(supplier.digits.size() + 2 * body.size());
  out += supplier.digits;
  for (char c : body) {
    const auto code = table.code(c);
    if (!code) throw Error(ErrorKind::UnmappedCharacter, printable(c) + " in DOI \"" + normalized + "\"");
    out.append(code->data(), 2);
  }
  return out;
}

DecodedNumeral decode_numeral(std::string_view numeral, const SupplierRegistry& registry, const LookupTable& table) {
  const SupplierPrefix* supplier = registry.match(numeral);
  if (!supplier) throw Error(ErrorKind::UnknownSupplier, "no registered supplier prefix for \"" + std::string(numeral) + "\"");
  const std::string_view body = numeral.substr(supplier->digits.size());
  if (supplier->scheme == IdScheme::LocalId) return {*supplier, std::string(body)};

  if (body.size() % 2 != 0) throw Error(ErrorKind::OddLengthBody, "\"" + std::string(numeral) + "\"");
  std::string doi(kDoiLeadIn);
  doi.reserve(kDoiLeadIn.size() + body.size() / 2);
  for (std::size_t i = 0; i < body.size(); i += 2) {
    const auto c = table.character(body[i], body[i + 1]);
    if (!c) throw Error(ErrorKind::UnmappedCode, std::string(body.substr(i, 2)) + " in \"" + std::string(numeral) + "\"");
    doi.push_back(*c);
  }
  return {*supplier, std::move(doi)};
}

Oci build_oci(std::string_view citing_doi, std::string_view cited_doi, const SupplierPrefix& supplier,
              const LookupTable& table) {
  auto encode_role = [&](std::string_view doi, const char* role) {
    try {
      return encode_doi(doi, supplier, table);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(role) + " entity: " + std::string(e.detail()));
    }
  };
  std::string citing = encode_role(citing_doi, "citing");
  std::string cited = encode_role(cited_doi, "cited");
  return Oci(std::move(citing), std::move(cited));
}

Oci parse_oci(std::string_view text) {
  std::string_view body = text;
  if (body.starts_with("oci:")) body.remove_prefix(4);
  const auto dash = body.find('-');
  if (dash == std::string_view::npos || body.find('-', dash + 1) != std::string_view::npos)
    throw Error(ErrorKind::MalformedOci, "expected exactly one dash: \"" + std::string(text) + "\"");
  const auto citing = body.substr(0, dash);
  const auto cited = body.substr(dash + 1);
  if (!is_digits(citing) || !is_digits(cited))
    throw Error(ErrorKind::MalformedOci, "numerals must be non-empty digit strings: \"" + std::string(text) + "\"");
  return Oci(std::string(citing), std::string(cited));
}

std::string format_oci(const Oci& oci, OciForm form) {
  std::string out;
  out.reserve(oci.citing().size() + oci.cited().size() + 5);
  if (form == OciForm::Prefixed) out += "oci:";
  out += oci.citing();
  out += '-';
  out += oci.cited();
  return out;
}

}  // namespace coci
