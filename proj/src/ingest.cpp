#include "coci/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <istream>
#include <mutex>
#include <json.hpp>
#include <thread>

#include "coci/oci.hpp"

namespace coci {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// std::streambuf over zlib; plain (uncompressed) files pass through.
class GzipReadBuffer : public std::streambuf {
 public:
  explicit GzipReadBuffer(const fs::path& path) : file_(gzopen(path.c_str(), "rb")) {
    if (file_) gzbuffer(file_, 1 << 17);
  }
  ~GzipReadBuffer() override {
    if (file_) gzclose(file_);
  }
  GzipReadBuffer(const GzipReadBuffer&) = delete;
  GzipReadBuffer& operator=(const GzipReadBuffer&) = delete;

  bool is_open() const noexcept { return file_ != nullptr; }
  bool failed() const noexcept { return failed_; }
  std::string error() const {
    int code = 0;
    return file_ ? gzerror(file_, &code) : "cannot open";
  }
  std::uint64_t bytes() const noexcept { return bytes_; }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
    if (n <= 0) {
      int code = Z_OK;
      gzerror(file_, &code);
      failed_ = n < 0 || (code != Z_OK && code != Z_STREAM_END);  // Z_BUF_ERROR: truncated stream
      return traits_type::eof();
    }
    bytes_ += static_cast<std::uint64_t>(n);
    setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
    return traits_type::to_int_type(*gptr());
  }

 private:
  gzFile file_;
  std::array<char, 1 << 16> buffer_{};
  std::uint64_t bytes_ = 0;
  bool failed_ = false;
};

std::optional<int> as_int(const json& v) {
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i >= std::numeric_limits<int>::min() && i <= std::numeric_limits<int>::max()) return static_cast<int>(i);
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    int out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size()) return out;
  }
  return std::nullopt;
}

// Reference years are free text in Crossref ("2012", "2012a", 2012).
std::optional<int> reference_year(const json& v) {
  if (v.is_number_integer()) return as_int(v);
  if (!v.is_string()) return std::nullopt;
  const auto& s = v.get_ref<const std::string&>();
  std::size_t n = 0;
  while (n < s.size() && n < 5 && s[n] >= '0' && s[n] <= '9') ++n;
  if (n != 4) return std::nullopt;
  return std::stoi(s.substr(0, 4));
}

void collect_strings(const json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v)
      if (e.is_string()) out.push_back(e.get<std::string>());
  }
}

std::optional<WorkRecord> to_work(const json& item) {
  const auto doi_it = item.find("DOI");
  if (doi_it == item.end() || !doi_it->is_string()) return std::nullopt;
  auto doi = try_normalize_doi(doi_it->get_ref<const std::string&>());
  if (!doi) return std::nullopt;

  WorkRecord w;
  w.doi = *std::move(doi);
  if (const auto it = item.find("issued"); it != item.end() && it->is_object()) {
    if (const auto parts = it->find("date-parts");
        parts != it->end() && parts->is_array() && !parts->empty() && parts->front().is_array()) {
      for (const auto& p : parts->front()) {
        const auto v = as_int(p);
        if (!v) break;
        w.issued.push_back(*v);
      }
    }
  }
  if (const auto it = item.find("ISSN"); it != item.end()) collect_strings(*it, w.issns);
  if (const auto it = item.find("type"); it != item.end() && it->is_string()) w.pub_type = it->get<std::string>();
  if (const auto it = item.find("author"); it != item.end() && it->is_array()) {
    for (const auto& a : *it) {
      if (!a.is_object()) continue;
      if (const auto o = a.find("ORCID"); o != a.end() && o->is_string()) w.orcids.push_back(o->get<std::string>());
    }
  }
  if (const auto it = item.find("reference"); it != item.end() && it->is_array()) {
    w.references.reserve(it->size());
    for (const auto& r : *it) {
      if (!r.is_object()) continue;
      ReferenceEntry ref;
      if (const auto d = r.find("DOI"); d != r.end() && d->is_string())
        ref.doi = try_normalize_doi(d->get_ref<const std::string&>());
      if (const auto y = r.find("year"); y != r.end()) ref.year = reference_year(*y);
      w.references.push_back(std::move(ref));
    }
  }
  return w;
}

bool wanted_key(const std::string& key) {
  return key == "DOI" || key == "issued" || key == "ISSN" || key == "type" || key == "author" || key == "reference";
}

// SAX consumer that materializes one item at a time, keeping only the fields
// listed in wanted_key, and hands each finished item to `emit`.
template <typename Emit>
class ItemSax {
 public:
  explicit ItemSax(Emit emit) : emit_(std::move(emit)) {}

  std::string error;

  bool null() { return value(json(nullptr)); }
  bool boolean(bool v) { return value(json(v)); }
  bool number_integer(json::number_integer_t v) { return value(json(v)); }
  bool number_unsigned(json::number_unsigned_t v) { return value(json(v)); }
  bool number_float(json::number_float_t v, const std::string&) { return value(json(v)); }
  bool string(json::string_t& v) { return value(json(std::move(v))); }
  bool binary(json::binary_t&) { return true; }
  bool start_object(std::size_t) { return start(true); }
  bool start_array(std::size_t) { return start(false); }
  bool key(json::string_t& k) {
    stack_.back().key = std::move(k);
    return true;
  }
  bool end_object() { return end(); }
  bool end_array() { return end(); }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    error = ex.what();
    return false;
  }

 private:
  enum class Role { Root, Message, Items, Item, Capture, Skip };
  struct Frame {
    Role role;
    bool object;
    std::string key;
    json* node = nullptr;
  };

  bool value(json&& v) {
    if (stack_.empty()) return true;
    Frame& top = stack_.back();
    if (top.role == Role::Item) {
      if (wanted_key(top.key)) item_[top.key] = std::move(v);
    } else if (top.role == Role::Capture) {
      if (top.object) (*top.node)[top.key] = std::move(v);
      else top.node->push_back(std::move(v));
    }
    return true;
  }

  bool start(bool object) {
    if (stack_.empty()) {
      stack_.push_back({object ? Role::Root : Role::Items, object, {}});
      return true;
    }
    Frame& top = stack_.back();
    Frame next{Role::Skip, object, {}};
    switch (top.role) {
      case Role::Root:
        if (top.key == "items" && !object) next.role = Role::Items;
        else if (top.key == "message" && object) next.role = Role::Message;
        break;
      case Role::Message:
        if (top.key == "items" && !object) next.role = Role::Items;
        break;
      case Role::Items:
        if (object) {
          next.role = Role::Item;
          item_ = json::object();
        }
        break;
      case Role::Item:
        if (wanted_key(top.key)) {
          next.role = Role::Capture;
          next.node = &(item_[top.key] = object ? json::object() : json::array());
        }
        break;
      case Role::Capture: {
        next.role = Role::Capture;
        json fresh = object ? json::object() : json::array();
        if (top.object) {
          next.node = &((*top.node)[top.key] = std::move(fresh));
        } else {
          top.node->push_back(std::move(fresh));
          next.node = &top.node->back();
        }
        break;
      }
      case Role::Skip:
        break;
    }
    stack_.push_back(std::move(next));
    return true;
  }

  bool end() {
    const Role role = stack_.back().role;
    stack_.pop_back();
    if (role == Role::Item) {
      emit_(item_);
      item_ = json();
    }
    return true;
  }

  Emit emit_;
  std::vector<Frame> stack_;
  json item_;
};

struct FileCounts {
  std::uint64_t items = 0;
  std::uint64_t items_without_doi = 0;
  std::uint64_t bytes = 0;
};

// Parses one file, calling `sink(WorkRecord&&)` per item. Returns the failure
// instead of throwing so that callers can route it through abort_file.
template <typename Sink>
std::optional<FileFailure> parse_file(const fs::path& path, Sink&& sink, FileCounts& counts) {
  GzipReadBuffer buffer(path);
  if (!buffer.is_open()) return FileFailure{path, ErrorKind::UnreadableFile, "cannot open " + path.string()};
  std::istream in(&buffer);

  auto emit = [&](const json& item) {
    if (auto work = to_work(item)) {
      ++counts.items;
      sink(*std::move(work));
    } else {
      ++counts.items_without_doi;
    }
  };
  ItemSax<decltype(emit)> sax(emit);
  bool ok = false;
  try {
    ok = json::sax_parse(in, &sax);
  } catch (const json::exception& e) {
    sax.error = e.what();
  }
  counts.bytes = buffer.bytes();
  if (buffer.failed()) return FileFailure{path, ErrorKind::UnreadableFile, path.string() + ": " + buffer.error()};
  if (!ok) return FileFailure{path, ErrorKind::MalformedJson, path.string() + ": " + sax.error};
  return std::nullopt;
}

// Bounded queue carrying one file's records from a parser thread to the
// consumer.
class FileChannel {
 public:
  explicit FileChannel(std::size_t capacity) : capacity_(capacity) {}

  // False when the scan was cancelled.
  bool push(WorkRecord&& w) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_ || cancelled_; });
    if (cancelled_) return false;
    queue_.push_back(std::move(w));
    not_empty_.notify_one();
    return true;
  }

  void close(std::optional<FileFailure> failure, FileCounts counts) {
    std::lock_guard lock(mutex_);
    closed_ = true;
    failure_ = std::move(failure);
    counts_ = counts;
    not_empty_.notify_one();
  }

  void cancel() {
    std::lock_guard lock(mutex_);
    cancelled_ = true;
    not_full_.notify_all();
  }

  // Returns false once the channel is closed and drained.
  bool pop(WorkRecord& out) {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return false;
    out = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return true;
  }

  std::optional<FileFailure> failure() const { return failure_; }
  FileCounts counts() const { return counts_; }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<WorkRecord> queue_;
  bool closed_ = false;
  bool cancelled_ = false;
  std::optional<FileFailure> failure_;
  FileCounts counts_;
};

bool is_dump_file(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.ends_with(".json") || name.ends_with(".json.gz");
}

void finish_file(const fs::path& path, std::optional<FileFailure> failure, const FileCounts& counts,
                 DumpVisitor& visitor, ScanStats& stats) {
  stats.bytes_read += counts.bytes;
  if (failure) {
    ++stats.skipped_files;
    stats.failures.push_back(*failure);
    visitor.abort_file(*failure);
  } else {
    ++stats.files;
    stats.items += counts.items;
    stats.items_without_doi += counts.items_without_doi;
    visitor.commit_file(path);
  }
}

}  // namespace

std::vector<fs::path> list_dump_files(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(ErrorKind::UnreadableFile, "no such dump: " + path.string());
  if (!fs::is_directory(path, ec)) return {path};
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(path, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && is_dump_file(it->path())) files.push_back(it->path());
  }
  if (ec) throw Error(ErrorKind::UnreadableFile, path.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

ScanStats scan_dump(const fs::path& path, DumpVisitor& visitor, const ScanOptions& options) {
  const auto files = list_dump_files(path);
  ScanStats stats;

  if (options.jobs <= 1 || files.size() <= 1) {
    for (const auto& file : files) {
      visitor.begin_file(file);
      FileCounts counts;
      auto failure = parse_file(file, [&](WorkRecord&& w) { visitor.record(std::move(w)); }, counts);
      finish_file(file, std::move(failure), counts, visitor, stats);
    }
    return stats;
  }

  // Parallel parsing with in-order delivery: worker k claims files in
  // increasing order and the consumer drains channel i before channel i+1,
  // so at most `jobs` files are in flight and the output order is the same
  // as the sequential scan.
  std::vector<std::unique_ptr<FileChannel>> channels;
  channels.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) channels.push_back(std::make_unique<FileChannel>(options.queue_capacity));

  std::atomic<std::size_t> next_file{0};
  std::atomic<bool> cancelled{false};
  std::mutex window_mutex;
  std::condition_variable window_cv;
  std::size_t consumed = 0;  // guarded by window_mutex

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_file.fetch_add(1);
      if (i >= files.size()) return;
      {
        std::unique_lock lock(window_mutex);
        window_cv.wait(lock, [&] { return i < consumed + options.jobs || cancelled.load(); });
      }
      if (cancelled) return;
      FileCounts counts;
      auto failure = parse_file(files[i], [&](WorkRecord&& w) { channels[i]->push(std::move(w)); }, counts);
      channels[i]->close(std::move(failure), counts);
    }
  };

  std::vector<std::jthread> pool;
  const unsigned n = std::min<unsigned>(options.jobs, static_cast<unsigned>(files.size()));
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);

  auto cancel_all = [&] {
    cancelled = true;
    for (auto& c : channels) c->cancel();
    {
      std::lock_guard lock(window_mutex);
    }
    window_cv.notify_all();
  };

  try {
    for (std::size_t i = 0; i < files.size(); ++i) {
      visitor.begin_file(files[i]);
      WorkRecord w;
      while (channels[i]->pop(w)) visitor.record(std::move(w));
      finish_file(files[i], channels[i]->failure(), channels[i]->counts(), visitor, stats);
      channels[i].reset(new FileChannel(0));
      {
        std::lock_guard lock(window_mutex);
        ++consumed;
      }
      window_cv.notify_all();
    }
  } catch (...) {
    cancel_all();
    // Workers blocked in push() observe the cancel; parse_file then runs to
    // completion on the remaining input without queueing, which is bounded
    // by the file size, before the thread exits.
    throw;
  }
  return stats;
}

std::vector<WorkRecord> read_dump(const fs::path& path, ScanStats* stats) {
  struct Collector : DumpVisitor {
    std::vector<WorkRecord> all;
    std::size_t file_start = 0;
    void begin_file(const fs::path&) override { file_start = all.size(); }
    void record(WorkRecord&& w) override { all.push_back(std::move(w)); }
    void abort_file(const FileFailure&) override { all.resize(file_start); }
  } collector;
  auto s = scan_dump(path, collector);
  if (stats) *stats = std::move(s);
  return std::move(collector.all);
}

}  // namespace coci
