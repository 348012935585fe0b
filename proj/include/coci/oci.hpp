#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coci/error.hpp"

namespace coci {

// Lowercases and trims a DOI. Throws Error(MalformedDoi) unless the result
// starts with "10." and has at least one character after it.
std::string normalize_doi(std::string_view doi);

// Same as normalize_doi, without throwing.
std::optional<std::string> try_normalize_doi(std::string_view doi);

// Registrant part of a normalized DOI ("10.1186" for "10.1186/xyz").
std::string_view doi_prefix(std::string_view doi) noexcept;

/// Fixed-width character table used to turn identifiers into numerals.
///
/// Each mapped character owns a distinct two-digit code "00".."99" and the
/// mapping is injective in both directions, so a numeral splits into codes
/// without separators. Only single-byte characters can be mapped.
class LookupTable {
 public:
  // Table compiled into the library; identical to data/lookup_v1.csv.
  static const LookupTable& builtin();

  // Reads a two-column `c,code` CSV with header. Throws Error(InvalidConfig)
  // on duplicate characters or codes and on codes that are not two digits.
  static LookupTable from_csv(std::istream& in);
  static LookupTable load(const std::filesystem::path& path);

  // Two-digit code for `c`, if mapped.
  std::optional<std::array<char, 2>> code(char c) const noexcept;
  // Character for a two-digit code, if mapped.
  std::optional<char> character(char tens, char units) const noexcept;

  std::vector<std::pair<char, std::string>> entries() const;
  std::size_t size() const noexcept { return size_; }
  void write_csv(std::ostream& out) const;

  bool operator==(const LookupTable&) const = default;

 private:
  LookupTable();
  void insert(char c, int code);

  std::array<std::int16_t, 256> to_code_;
  std::array<std::int16_t, 100> to_char_;
  std::size_t size_ = 0;
};

enum class IdScheme {
  Doi,      // body is a lookup-table encoding of a DOI minus its "10." lead-in
  LocalId,  // body is a dataset-local numeric id, passed through verbatim
};

struct SupplierPrefix {
  std::string digits;
  std::string name;
  IdScheme scheme = IdScheme::Doi;

  bool operator==(const SupplierPrefix&) const = default;
};

// Prefix-free set of supplier prefixes. Every prefix is a non-empty digit
// string ending in '0', and no registered prefix starts another one, so a
// numeral's supplier is always found unambiguously.
class SupplierRegistry {
 public:
  static const SupplierRegistry& builtin();

  // `digits,name,scheme` CSV with header; scheme is "doi" or "local".
  static SupplierRegistry from_csv(std::istream& in);
  static SupplierRegistry load(const std::filesystem::path& path);

  explicit SupplierRegistry(std::vector<SupplierPrefix> entries);

  const SupplierPrefix* find(std::string_view digits) const noexcept;
  // Registered prefix that starts `numeral`, if any.
  const SupplierPrefix* match(std::string_view numeral) const noexcept;
  const std::vector<SupplierPrefix>& entries() const noexcept { return entries_; }

 private:
  std::vector<SupplierPrefix> entries_;
};

// The "020" Crossref entry of the built-in registry.
const SupplierPrefix& crossref_supplier();

/// Open Citation Identifier: a citing and a cited numeral, each starting
/// with its supplier prefix.
class Oci {
 public:
  // Throws Error(MalformedOci) unless both numerals are non-empty digit strings.
  Oci(std::string citing, std::string cited);

  const std::string& citing() const noexcept { return citing_; }
  const std::string& cited() const noexcept { return cited_; }

  auto operator<=>(const Oci&) const = default;

 private:
  std::string citing_;
  std::string cited_;
};

enum class OciForm { Prefixed, Bare };

// Supplier digits followed by the two-digit code of every character of the
// normalized DOI after its "10." lead-in.
std::string encode_doi(std::string_view doi, const SupplierPrefix& supplier,
                       const LookupTable& table = LookupTable::builtin());

struct DecodedNumeral {
  SupplierPrefix supplier;
  // A DOI for IdScheme::Doi suppliers, the verbatim local id otherwise.
  std::string identifier;
};

DecodedNumeral decode_numeral(std::string_view numeral,
                              const SupplierRegistry& registry = SupplierRegistry::builtin(),
                              const LookupTable& table = LookupTable::builtin());

Oci build_oci(std::string_view citing_doi, std::string_view cited_doi,
              const SupplierPrefix& supplier = crossref_supplier(),
              const LookupTable& table = LookupTable::builtin());

// Accepts "oci:<citing>-<cited>" or the bare "<citing>-<cited>".
Oci parse_oci(std::string_view text);

std::string format_oci(const Oci& oci, OciForm form = OciForm::Prefixed);

}  // namespace coci
