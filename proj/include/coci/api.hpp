#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coci/model.hpp"

namespace coci {

enum class MetadataMode { Live, CacheOnly, Off };

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path index;
  std::size_t default_page_size = 1000;
  std::size_t max_page_size = 10000;
  MetadataMode metadata_mode = MetadataMode::Off;
  std::string metadata_base_url;           // e.g. https://api.crossref.org
  std::filesystem::path metadata_cache;    // defaults to <index>/metadata-cache
  std::chrono::milliseconds request_timeout{10000};

  // Throws Error(InvalidConfig).
  void validate() const;
  std::filesystem::path cache_dir() const;

  // Flat `key = value` lines; '#' starts a comment. Keys: bind (host:port),
  // index, default_page_size, max_page_size, metadata_mode
  // (live|cache-only|off), metadata_base_url, metadata_cache,
  // request_timeout (seconds). Throws Error(InvalidConfig); the result is
  // validated.
  static ApiConfig parse(std::istream& in);
  static ApiConfig load(const std::filesystem::path& path);
};

// Bibliographic fields from the external metadata service.
struct Bibliographic {
  std::string title;
  std::vector<std::string> authors;  // "Family, Given"
  std::string year;
  std::string venue;
  std::string volume;
  std::string issue;
  std::string page;

  bool operator==(const Bibliographic&) const = default;
};

// Maps a works-API JSON document (with or without the "message" envelope).
// Throws Error(MalformedJson).
Bibliographic parse_works_response(std::string_view body);

struct MetadataRecord {
  std::string doi;
  Bibliographic bib;
  std::uint64_t reference_count = 0;
  std::uint64_t citation_count = 0;
};

enum class FetchStatus { Ok, NotFound, Failed, TimedOut };

struct FetchResult {
  FetchStatus status = FetchStatus::Failed;
  Bibliographic bib;  // valid when status is Ok
};

/// Bibliographic lookups with an on-disk cache.
///
/// Cache entries are one JSON file per normalized DOI. Reads run
/// concurrently; writes are atomic renames made under a lock. At most one
/// fetch per DOI is in flight: concurrent callers for the same DOI wait on
/// the first caller's result.
class MetadataResolver {
 public:
  using Fetcher = std::function<FetchResult(const std::string& doi)>;

  struct Lookup {
    std::optional<Bibliographic> bib;
    bool from_cache = false;
    FetchStatus status = FetchStatus::NotFound;
  };

  // Live mode fetches `GET {base}/works/{doi}` over HTTP(S) unless a
  // `fetcher` is supplied.
  explicit MetadataResolver(const ApiConfig& config, Fetcher fetcher = {});
  ~MetadataResolver();

  MetadataMode mode() const noexcept;
  // `doi` must be normalized.
  Lookup resolve(const std::string& doi);

  std::optional<Bibliographic> cached(const std::string& doi) const;
  void store(const std::string& doi, const Bibliographic& bib);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Cache file name for a normalized DOI.
std::string metadata_cache_name(std::string_view doi);

/// HTTP service over a citation index.
///
/// Routes: /references/{doi}, /citations/{doi}, /citation/{oci},
/// /metadata/{doi}__{doi}..., /ci/{oci}. The index is opened read-only on
/// first use and every later request sees committed loads; without an index
/// the data routes answer 503.
class ApiServer {
 public:
  explicit ApiServer(ApiConfig config, std::ostream* access_log = nullptr,
                     MetadataResolver::Fetcher fetcher = {});
  ~ApiServer();

  // Returns the bound port. Throws Error(InvalidConfig) when binding fails.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coci
