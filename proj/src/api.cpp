#include "coci/api.hpp"

#include <httplib.h>

#include <charconv>
#include <fstream>
#include <future>
#include <json.hpp>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "coci/build.hpp"
#include "coci/rdf.hpp"
#include "coci/store.hpp"

namespace coci {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  const auto n = parse_number<std::size_t>(value);
  if (!n || *n == 0) throw Error(ErrorKind::InvalidConfig, key + " must be a positive integer: " + value);
  return *n;
}

bool is_http_url(std::string_view url) {
  return is_absolute_url(url) && (url.starts_with("http://") || url.starts_with("https://"));
}

}  // namespace

// ---------------------------------------------------------------------------
// ApiConfig

void ApiConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorKind::InvalidConfig, "port out of range");
  if (default_page_size == 0) throw Error(ErrorKind::InvalidConfig, "default_page_size must be positive");
  if (max_page_size < default_page_size)
    throw Error(ErrorKind::InvalidConfig, "max_page_size must not be below default_page_size");
  if (metadata_mode == MetadataMode::Live && !is_http_url(metadata_base_url))
    throw Error(ErrorKind::InvalidConfig, "live metadata mode needs an http(s) metadata_base_url");
  if (request_timeout.count() <= 0) throw Error(ErrorKind::InvalidConfig, "request_timeout must be positive");
}

fs::path ApiConfig::cache_dir() const {
  return metadata_cache.empty() ? index / "metadata-cache" : metadata_cache;
}

ApiConfig ApiConfig::parse(std::istream& in) {
  ApiConfig c;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "bind") {
      const auto colon = value.rfind(':');
      const auto port = colon == std::string::npos ? std::nullopt : parse_number<int>(value.substr(colon + 1));
      if (!port || colon == 0) throw Error(ErrorKind::InvalidConfig, "bind must be host:port: " + value);
      c.host = value.substr(0, colon);
      c.port = *port;
    } else if (key == "index") {
      c.index = value;
    } else if (key == "default_page_size") {
      c.default_page_size = parse_size(key, value);
    } else if (key == "max_page_size") {
      c.max_page_size = parse_size(key, value);
    } else if (key == "metadata_mode") {
      if (value == "live") c.metadata_mode = MetadataMode::Live;
      else if (value == "cache-only") c.metadata_mode = MetadataMode::CacheOnly;
      else if (value == "off") c.metadata_mode = MetadataMode::Off;
      else throw Error(ErrorKind::InvalidConfig, "metadata_mode must be live, cache-only or off: " + value);
    } else if (key == "metadata_base_url") {
      c.metadata_base_url = value;
    } else if (key == "metadata_cache") {
      c.metadata_cache = value;
    } else if (key == "request_timeout") {
      const auto seconds = parse_number<double>(value);
      if (!seconds || *seconds <= 0) throw Error(ErrorKind::InvalidConfig, "request_timeout must be positive seconds: " + value);
      c.request_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(*seconds * 1000));
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown key: " + key);
    }
  }
  c.validate();
  return c;
}

ApiConfig ApiConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot read " + path.string());
  return parse(in);
}

// ---------------------------------------------------------------------------
// Metadata

namespace {

std::string json_text(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return {};
}

std::string first_text(const ordered_json& m, const char* key) {
  const auto it = m.find(key);
  if (it == m.end()) return {};
  if (it->is_array()) return it->empty() ? std::string() : json_text(it->front());
  return json_text(*it);
}

ordered_json bib_to_json(const Bibliographic& b) {
  return {{"title", b.title}, {"authors", b.authors}, {"year", b.year}, {"venue", b.venue},
          {"volume", b.volume}, {"issue", b.issue}, {"page", b.page}};
}

Bibliographic bib_from_json(const ordered_json& j) {
  Bibliographic b;
  b.title = j.at("title").get<std::string>();
  b.authors = j.at("authors").get<std::vector<std::string>>();
  b.year = j.at("year").get<std::string>();
  b.venue = j.at("venue").get<std::string>();
  b.volume = j.at("volume").get<std::string>();
  b.issue = j.at("issue").get<std::string>();
  b.page = j.at("page").get<std::string>();
  return b;
}

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing '/'
};

BaseUrl split_base(std::string_view url) {
  const auto scheme_end = url.find("://");
  const auto slash = url.find('/', scheme_end + 3);
  BaseUrl b{std::string(url.substr(0, slash)), slash == std::string_view::npos ? "" : std::string(url.substr(slash))};
  while (!b.path.empty() && b.path.back() == '/') b.path.pop_back();
  return b;
}

FetchResult http_fetch(const BaseUrl& base, std::chrono::milliseconds timeout, const std::string& doi) {
  httplib::Client client(base.origin);
  if (!client.is_valid()) return {FetchStatus::Failed, {}};
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_follow_location(true);
  const auto res = client.Get(base.path + "/works/" + rdf::percent_encode_doi(doi), {{"Accept", "application/json"}});
  if (!res) {
    const auto err = res.error();
    return {err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ? FetchStatus::TimedOut
                                                                                      : FetchStatus::Failed,
            {}};
  }
  if (res->status == 404) return {FetchStatus::NotFound, {}};
  if (res->status != 200) return {FetchStatus::Failed, {}};
  try {
    return {FetchStatus::Ok, parse_works_response(res->body)};
  } catch (const Error&) {
    return {FetchStatus::Failed, {}};
  }
}

}  // namespace

Bibliographic parse_works_response(std::string_view body) {
  ordered_json j;
  try {
    j = ordered_json::parse(body);
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorKind::MalformedJson, e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::MalformedJson, "works response is not an object");
  const ordered_json& m = j.contains("message") && j["message"].is_object() ? j["message"] : j;

  Bibliographic b;
  b.title = first_text(m, "title");
  b.venue = first_text(m, "container-title");
  b.volume = first_text(m, "volume");
  b.issue = first_text(m, "issue");
  b.page = first_text(m, "page");
  if (const auto it = m.find("author"); it != m.end() && it->is_array()) {
    for (const auto& a : *it) {
      if (!a.is_object()) continue;
      const std::string family = first_text(a, "family"), given = first_text(a, "given");
      std::string name = family.empty() ? given : given.empty() ? family : family + ", " + given;
      if (name.empty()) name = first_text(a, "name");
      if (!name.empty()) b.authors.push_back(std::move(name));
    }
  }
  if (const auto it = m.find("issued"); it != m.end() && it->is_object()) {
    const auto parts = it->find("date-parts");
    if (parts != it->end() && parts->is_array() && !parts->empty() && parts->front().is_array() &&
        !parts->front().empty())
      b.year = json_text(parts->front().front());
  }
  return b;
}

std::string metadata_cache_name(std::string_view doi) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : doi) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf) + ".json";
}

struct MetadataResolver::Impl {
  MetadataMode mode;
  fs::path cache_dir;
  Fetcher fetch;
  std::mutex write_mutex;
  std::mutex inflight_mutex;
  std::map<std::string, std::shared_future<FetchResult>> inflight;
};

MetadataResolver::MetadataResolver(const ApiConfig& config, Fetcher fetcher) : impl_(std::make_unique<Impl>()) {
  impl_->mode = config.metadata_mode;
  impl_->cache_dir = config.cache_dir();
  if (fetcher) {
    impl_->fetch = std::move(fetcher);
  } else if (config.metadata_mode == MetadataMode::Live) {
    impl_->fetch = [base = split_base(config.metadata_base_url), timeout = config.request_timeout](const std::string& doi) {
      return http_fetch(base, timeout, doi);
    };
  }
}

MetadataResolver::~MetadataResolver() = default;

MetadataMode MetadataResolver::mode() const noexcept { return impl_->mode; }

std::optional<Bibliographic> MetadataResolver::cached(const std::string& doi) const {
  std::ifstream in(impl_->cache_dir / metadata_cache_name(doi), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = ordered_json::parse(in);
    if (j.at("doi").get<std::string>() != doi) return std::nullopt;
    return bib_from_json(j.at("bib"));
  } catch (const ordered_json::exception&) {
    return std::nullopt;
  }
}

void MetadataResolver::store(const std::string& doi, const Bibliographic& bib) {
  const ordered_json j = {{"doi", doi}, {"bib", bib_to_json(bib)}};
  std::lock_guard lock(impl_->write_mutex);
  std::error_code ec;
  fs::create_directories(impl_->cache_dir, ec);
  const fs::path target = impl_->cache_dir / metadata_cache_name(doi);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump();
    if (!out) return;  // an unwritable cache only costs a refetch
  }
  fs::rename(tmp, target, ec);
}

MetadataResolver::Lookup MetadataResolver::resolve(const std::string& doi) {
  if (impl_->mode == MetadataMode::Off) return {};
  if (auto bib = cached(doi)) return {std::move(bib), true, FetchStatus::Ok};
  if (impl_->mode == MetadataMode::CacheOnly || !impl_->fetch) return {};

  std::shared_future<FetchResult> result;
  std::optional<std::promise<FetchResult>> lead;
  {
    std::lock_guard lock(impl_->inflight_mutex);
    if (const auto it = impl_->inflight.find(doi); it != impl_->inflight.end()) {
      result = it->second;
    } else {
      lead.emplace();
      result = lead->get_future().share();
      impl_->inflight.emplace(doi, result);
    }
  }
  if (lead) {
    FetchResult r;
    if (auto bib = cached(doi)) {
      r = {FetchStatus::Ok, std::move(*bib)};  // a previous leader finished in between
    } else {
      try {
        r = impl_->fetch(doi);
      } catch (...) {
        r = {FetchStatus::Failed, {}};
      }
      if (r.status == FetchStatus::Ok) store(doi, r.bib);
    }
    lead->set_value(r);
    std::lock_guard lock(impl_->inflight_mutex);
    impl_->inflight.erase(doi);
  }
  const FetchResult& r = result.get();
  Lookup out;
  out.status = r.status;
  if (r.status == FetchStatus::Ok) out.bib = r.bib;
  return out;
}

// ---------------------------------------------------------------------------
// Server

namespace {

enum class Format { Json, Csv, NTriples };

constexpr const char* kJsonType = "application/json";
constexpr const char* kCsvType = "text/csv; charset=utf-8";
constexpr const char* kNTriplesType = "application/n-triples";

std::optional<Format> format_for(std::string_view media, bool nt_allowed) {
  if (media == "application/json" || media == "*/*" || media == "application/*") return Format::Json;
  if (media == "text/csv" || media == "text/*") return Format::Csv;
  if (nt_allowed && media == "application/n-triples") return Format::NTriples;
  return std::nullopt;
}

// ?format= wins over Accept; among Accept entries the highest q wins, then
// the earliest. Nullopt means 406.
std::optional<Format> negotiate(const httplib::Request& req, bool nt_allowed) {
  if (req.has_param("format")) {
    const std::string f = req.get_param_value("format");
    if (f == "json") return Format::Json;
    if (f == "csv") return Format::Csv;
    if (nt_allowed && (f == "nt" || f == "ntriples" || f == "n-triples")) return Format::NTriples;
    return std::nullopt;
  }
  const std::string accept = req.get_header_value("Accept");
  if (trim(accept).empty()) return Format::Json;
  std::optional<Format> best;
  double best_q = 0;
  std::istringstream entries(accept);
  std::string entry;
  while (std::getline(entries, entry, ',')) {
    std::istringstream parts(entry);
    std::string media, param;
    std::getline(parts, media, ';');
    double q = 1.0;
    while (std::getline(parts, param, ';')) {
      const std::string p = trim(param);
      if (p.starts_with("q=")) q = parse_number<double>(p.substr(2)).value_or(0.0);
    }
    const auto f = format_for(trim(media), nt_allowed);
    if (f && q > best_q) {
      best = f;
      best_q = q;
    }
  }
  return best;
}

ordered_json citation_json(const CitationRecord& rec) {
  const auto row = citation_row(rec);
  ordered_json o = ordered_json::object();
  for (std::size_t i = 0; i < row.size(); ++i) o[std::string(kCitationColumns[i])] = row[i];
  return o;
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", kJsonType);
}

void send_error(httplib::Response& res, int status, std::string_view message) {
  send_json(res, status, {{"error", std::string(message)}});
}

void send_records(httplib::Response& res, std::span<const CitationRecord> records, Format format, bool as_list) {
  res.status = 200;
  switch (format) {
    case Format::Json: {
      if (!as_list) {
        res.set_content(citation_json(records.front()).dump() + "\n", kJsonType);
        return;
      }
      ordered_json arr = ordered_json::array();
      for (const auto& r : records) arr.push_back(citation_json(r));
      res.set_content(arr.dump() + "\n", kJsonType);
      return;
    }
    case Format::Csv: {
      std::ostringstream os;
      emit_citations_csv(records, os);
      res.set_content(os.str(), kCsvType);
      return;
    }
    case Format::NTriples: {
      std::ostringstream os;
      for (const auto& r : records) rdf::write_ntriples(rdf::citation_to_ntriples(r), os);
      res.set_content(os.str(), kNTriplesType);
      return;
    }
  }
}

std::string join_authors(const std::vector<std::string>& authors) {
  std::string out;
  for (const auto& a : authors) out += (out.empty() ? "" : "; ") + a;
  return out;
}

}  // namespace

struct ApiServer::Impl {
  ApiConfig config;
  std::ostream* log;
  std::mutex log_mutex;
  MetadataResolver resolver;
  httplib::Server server;
  std::mutex index_mutex;
  std::shared_ptr<const CitationIndex> index_;

  Impl(ApiConfig c, std::ostream* l, MetadataResolver::Fetcher f)
      : config(std::move(c)), log(l), resolver(config, std::move(f)) {}

  std::shared_ptr<const CitationIndex> index() {
    std::lock_guard lock(index_mutex);
    if (!index_) {
      try {
        index_ = std::make_shared<CitationIndex>(CitationIndex::open(config.index, CitationIndex::Mode::ReadOnly));
      } catch (const Error&) {
        return nullptr;
      }
    }
    return index_;
  }

  // Offset and limit from the query string; nullopt after sending 400.
  std::optional<std::pair<std::size_t, std::size_t>> paging(const httplib::Request& req, httplib::Response& res) {
    std::size_t offset = 0, limit = config.default_page_size;
    for (auto [name, target] : {std::pair{"offset", &offset}, std::pair{"limit", &limit}}) {
      if (!req.has_param(name)) continue;
      const auto v = parse_number<std::size_t>(req.get_param_value(name));
      if (!v) {
        send_error(res, 400, std::string(name) + " must be a non-negative integer");
        return std::nullopt;
      }
      *target = *v;
    }
    return std::pair{offset, std::min(limit, config.max_page_size)};
  }

  void list(const httplib::Request& req, httplib::Response& res, bool outgoing) {
    const auto format = negotiate(req, false);
    if (!format) return send_error(res, 406, "supported types: application/json, text/csv");
    const auto doi = try_normalize_doi(req.matches[1].str());
    if (!doi) return send_error(res, 400, "malformed DOI: " + req.matches[1].str());
    const auto page_args = paging(req, res);
    if (!page_args) return;
    const auto idx = index();
    if (!idx) return send_error(res, 503, "citation index not loaded");
    const Page page = outgoing ? idx->outgoing(*doi, page_args->first, page_args->second)
                               : idx->incoming(*doi, page_args->first, page_args->second);
    send_records(res, page.records, *format, true);
    res.set_header("X-Total-Count", std::to_string(page.total));
  }

  void single(const httplib::Request& req, httplib::Response& res, bool direct) {
    const auto format = negotiate(req, direct);
    if (!format)
      return send_error(res, 406, direct ? "supported types: application/json, text/csv, application/n-triples"
                                         : "supported types: application/json, text/csv");
    std::optional<Oci> oci;
    try {
      oci = parse_oci(req.matches[1].str());
    } catch (const Error& e) {
      return send_error(res, direct ? 404 : 400, e.what());
    }
    const auto idx = index();
    if (!idx) return send_error(res, 503, "citation index not loaded");
    const auto rec = idx->by_oci(*oci);
    if (!rec) return send_error(res, 404, "no citation " + format_oci(*oci));
    send_records(res, std::span(&*rec, 1), *format, false);
  }

  void metadata(const httplib::Request& req, httplib::Response& res) {
    const std::string list = req.matches[1].str();
    std::vector<std::string> dois;
    for (std::size_t start = 0;;) {
      const auto sep = list.find("__", start);
      const auto doi = try_normalize_doi(list.substr(start, sep == std::string::npos ? std::string::npos : sep - start));
      if (!doi) return send_error(res, 400, "malformed DOI list: " + list);
      dois.push_back(*doi);
      if (sep == std::string::npos) break;
      start = sep + 2;
    }
    const auto idx = index();
    if (!idx) return send_error(res, 503, "citation index not loaded");

    ordered_json out = ordered_json::array();
    bool all_timed_out = resolver.mode() == MetadataMode::Live;
    for (const auto& doi : dois) {
      const auto lookup = resolver.resolve(doi);
      if (lookup.status != FetchStatus::TimedOut) all_timed_out = false;
      const Bibliographic bib = lookup.bib.value_or(Bibliographic{});
      out.push_back({{"doi", doi},
                     {"title", bib.title},
                     {"author", join_authors(bib.authors)},
                     {"year", bib.year},
                     {"source_title", bib.venue},
                     {"volume", bib.volume},
                     {"issue", bib.issue},
                     {"page", bib.page},
                     {"reference_count", std::to_string(idx->reference_count(doi))},
                     {"citation_count", std::to_string(idx->citation_count(doi))}});
    }
    if (all_timed_out) return send_error(res, 504, "metadata service timed out");
    send_json(res, 200, out);
  }

  void routes() {
    server.Get(R"(/references/(.+))", [this](const auto& req, auto& res) { list(req, res, true); });
    server.Get(R"(/citations/(.+))", [this](const auto& req, auto& res) { list(req, res, false); });
    server.Get(R"(/citation/(.+))", [this](const auto& req, auto& res) { single(req, res, false); });
    server.Get(R"(/ci/(.+))", [this](const auto& req, auto& res) { single(req, res, true); });
    server.Get(R"(/metadata/(.+))", [this](const auto& req, auto& res) { metadata(req, res); });
    server.set_exception_handler([](const auto&, auto& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "internal error");
      }
    });
    if (log) {
      server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        std::lock_guard lock(log_mutex);
        *log << req.method << ' ' << req.target << ' ' << res.status << std::endl;
      });
    }
  }
};

ApiServer::ApiServer(ApiConfig config, std::ostream* access_log, MetadataResolver::Fetcher fetcher) {
  config.validate();
  if (config.index.empty()) throw Error(ErrorKind::InvalidConfig, "no index path configured");
  impl_ = std::make_unique<Impl>(std::move(config), access_log, std::move(fetcher));
  impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  auto& c = impl_->config;
  if (c.port == 0) {
    const int port = impl_->server.bind_to_any_port(c.host);
    if (port <= 0) throw Error(ErrorKind::InvalidConfig, "cannot bind " + c.host);
    c.port = port;
  } else if (!impl_->server.bind_to_port(c.host, c.port)) {
    throw Error(ErrorKind::InvalidConfig, "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  return c.port;
}

void ApiServer::run() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_) impl_->server.stop();
}

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace coci
