// Command-line driver: ingest, build, export-rdf, load, serve, resolve, stats.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "coci/api.hpp"
#include "coci/aux_store.hpp"
#include "coci/build.hpp"
#include "coci/rdf.hpp"
#include "coci/store.hpp"

namespace fs = std::filesystem;
using namespace coci;

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kUsage = 2;

// Raised for bad flag values detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void report_failures(const std::vector<FileFailure>& failures) {
  for (const auto& f : failures)
    std::cerr << "warning: skipped " << f.path.string() << ": " << to_string(f.kind) << ": " << f.message << "\n";
}

ScanOptions scan_options(unsigned jobs) {
  ScanOptions o;
  o.jobs = std::max(1u, jobs);
  return o;
}

int cmd_ingest(const fs::path& dump, const fs::path& aux, unsigned jobs) {
  const auto r = run_ingest(dump, aux, scan_options(jobs));
  report_failures(r.failures);
  std::cerr << "ingest: " << r.works << " works from " << r.files << " files (" << r.skipped_files << " skipped), "
            << r.references_with_doi << "/" << r.references << " references with a DOI; " << r.date_entries
            << " dates, " << r.issn_entries << " ISSN links, " << r.orcid_entries << " ORCID links; " << r.bytes_read
            << " bytes read\n";
  return kOk;
}

int cmd_build(const fs::path& dump, const fs::path& aux, const fs::path& out, unsigned jobs, const BuildConfig& config) {
  const auto r = run_build(dump, aux, out, config, scan_options(jobs),
                           [](const std::string& m) { std::cerr << "warning: " << m << "\n"; });
  report_failures(r.failures);
  std::cout << "citations.csv: " << r.citations << " rows\n"
            << "provenance.csv: " << r.citations << " rows\n";
  std::cerr << "build: " << r.works << " works from " << r.files << " files (" << r.skipped_files << " skipped), "
            << r.duplicates << " duplicate pairs dropped, " << r.self_citations << " self-citations, "
            << r.unencodable << " unencodable references\n";
  return kOk;
}

int cmd_export(const fs::path& csv_dir, const fs::path& out, const rdf::IriScheme& scheme) {
  const auto r = rdf::export_rdf(csv_dir, out, scheme, &std::cerr);
  std::cout << "citations.nt: " << r.data_triples << " triples for " << r.citations << " citations\n"
            << "citations-prov.nt: " << r.provenance_triples << " triples for " << r.provenance_records
            << " provenance records\n";
  if (r.corrupt_rows) std::cerr << "export-rdf: " << r.corrupt_rows << " corrupt rows skipped\n";
  return kOk;
}

int cmd_load(const std::vector<fs::path>& inputs, const fs::path& index_dir) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) files.push_back(fs::is_directory(p) ? p / "citations.csv" : p);
  auto index = CitationIndex::open(index_dir);
  const auto r = index.load(files, &std::cerr);
  const auto stats = index.corpus_stats();
  std::cerr << "load: " << r.inserted << " inserted, " << r.updated << " updated, " << r.unchanged << " unchanged, "
            << r.corrupt << " corrupt rows skipped; index holds " << stats.citations << " citations\n";
  return kOk;
}

int cmd_serve(ApiConfig config) {
  // Signals are taken by a dedicated thread so the server can be stopped
  // outside of a signal handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ApiServer server(config, &std::cout);
  const int port = server.bind();
  std::cerr << "serve: listening on " << config.host << ":" << port << " over " << config.index.string() << "\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  std::cerr << "serve: stopped\n";
  // Unblock the waiter if run() returned for another reason.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return kOk;
}

std::string supplier_text(const DecodedNumeral& d) {
  return d.supplier.digits + " " + d.supplier.name + (d.supplier.scheme == IdScheme::Doi ? " (doi)" : " (local id)");
}

int cmd_resolve(const std::string& text, const std::string& format, const std::string& index_dir) {
  Oci oci("0", "0");
  DecodedNumeral citing, cited;
  try {
    oci = parse_oci(text);
    citing = decode_numeral(oci.citing());
    cited = decode_numeral(oci.cited());
  } catch (const Error& e) {
    std::cerr << "resolve: " << e.what() << "\n";
    return kUsage;
  }

  if (format == "json" && index_dir.empty()) {
    nlohmann::ordered_json j;
    j["oci"] = format_oci(oci);
    j["citing"] = citing.identifier;
    j["citing_supplier"] = citing.supplier.name;
    j["cited"] = cited.identifier;
    j["cited_supplier"] = cited.supplier.name;
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::cout << "oci              " << format_oci(oci) << "\n"
            << "citing           " << citing.identifier << "\n"
            << "citing supplier  " << supplier_text(citing) << "\n"
            << "cited            " << cited.identifier << "\n"
            << "cited supplier   " << supplier_text(cited) << "\n";
  if (index_dir.empty()) return kOk;

  const auto index = CitationIndex::open(index_dir, CitationIndex::Mode::ReadOnly);
  const auto rec = index.by_oci(oci);
  if (!rec) {
    std::cerr << "resolve: " << format_oci(oci) << " is not in the index\n";
    return kFatal;
  }
  std::cout << "\n";
  if (format == "csv") {
    emit_citations_csv(std::span(&*rec, 1), std::cout);
  } else if (format == "nt") {
    rdf::write_ntriples(rdf::citation_to_ntriples(*rec), std::cout);
  } else {
    const auto row = citation_row(*rec);
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < row.size(); ++i) j[std::string(kCitationColumns[i])] = row[i];
    std::cout << j.dump(2) << "\n";
  }
  return kOk;
}

int cmd_stats(const fs::path& index_dir, const std::string& publishers, bool json) {
  const auto index = CitationIndex::open(index_dir, CitationIndex::Mode::ReadOnly);
  const auto corpus = index.corpus_stats();
  std::optional<PublisherStats> pubs;
  if (!publishers.empty()) pubs = index.publisher_stats(load_prefix_map(publishers));
  if (json) {
    nlohmann::ordered_json j;
    j["corpus"] = nlohmann::ordered_json::parse(corpus.to_json());
    if (pubs) j["publishers"] = nlohmann::ordered_json::parse(pubs->to_json());
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << corpus.to_text();
    if (pubs) std::cout << "\n" << pubs->to_text();
  }
  return kOk;
}

Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open citation index pipeline and service"};
  app.require_subcommand(1);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  fs::path dump, aux, out, csv_dir, index_dir;
  std::string run_timestamp, agent = BuildConfig{}.agent_iri, source = BuildConfig{}.source_url_template;
  rdf::IriScheme scheme;
  std::vector<fs::path> load_inputs;
  std::string config_file, bind;
  std::string oci_text, format = "json", resolve_index;
  std::string publishers;
  bool json = false;

  auto* ingest = app.add_subcommand("ingest", "Scan a dump and build the auxiliary store");
  ingest->add_option("--dump", dump, "Dump directory or file")->required();
  ingest->add_option("--aux", aux, "Auxiliary store directory")->required();
  ingest->add_option("--jobs", jobs, "Files parsed concurrently")->check(CLI::PositiveNumber);

  auto* build = app.add_subcommand("build", "Generate citations.csv and provenance.csv");
  build->add_option("--dump", dump, "Dump directory or file")->required();
  build->add_option("--aux", aux, "Auxiliary store directory")->required();
  build->add_option("--out", out, "Output directory")->required();
  build->add_option("--jobs", jobs, "Files parsed concurrently")->check(CLI::PositiveNumber);
  build->add_option("--run-timestamp", run_timestamp, "Provenance time, YYYY-MM-DDThh:mm:ssZ (default: now)");
  build->add_option("--agent", agent, "Provenance agent IRI")->capture_default_str();
  build->add_option("--source-template", source, "Primary source URL template with {doi}")->capture_default_str();

  auto* export_rdf = app.add_subcommand("export-rdf", "Convert the CSV output to N-Triples");
  export_rdf->add_option("--csv", csv_dir, "Directory with citations.csv and provenance.csv")->required();
  export_rdf->add_option("--out", out, "Output directory")->required();
  export_rdf->add_option("--citation-base", scheme.citation_base, "Citation IRI base")->capture_default_str();
  export_rdf->add_option("--entity-base", scheme.entity_base, "Entity IRI base")->capture_default_str();

  auto* load = app.add_subcommand("load", "Load citation CSVs into the index");
  load->add_option("--csv", load_inputs, "citations.csv files or directories holding one")->required();
  load->add_option("--index", index_dir, "Index directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--index", index_dir, "Index directory")->required();
  serve->add_option("--config", config_file, "key = value configuration file");
  serve->add_option("--bind", bind, "host:port, overriding the configuration");

  auto* resolve = app.add_subcommand("resolve", "Decode an OCI and optionally look it up");
  resolve->add_option("oci", oci_text, "OCI, with or without the oci: prefix")->required();
  resolve->add_option("--format", format, "Record format")->capture_default_str()->check(CLI::IsMember({"json", "csv", "nt"}));
  resolve->add_option("--index", resolve_index, "Index directory");

  auto* stats = app.add_subcommand("stats", "Print corpus and publisher statistics");
  stats->add_option("--index", index_dir, "Index directory")->required();
  stats->add_option("--publishers", publishers, "prefix,label CSV");
  stats->add_flag("--json", json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(dump, aux, jobs);
    if (*build) {
      BuildConfig config;
      config.agent_iri = agent;
      config.source_url_template = source;
      try {
        config.run_timestamp = run_timestamp.empty() ? now_utc() : parse_timestamp(run_timestamp);
      } catch (const Error& e) {
        throw UsageError(std::string("--run-timestamp: ") + e.what());
      }
      return cmd_build(dump, aux, out, jobs, config);
    }
    if (*export_rdf) return cmd_export(csv_dir, out, scheme);
    if (*load) return cmd_load(load_inputs, index_dir);
    if (*serve) {
      ApiConfig config;
      try {
        if (!config_file.empty()) config = ApiConfig::load(config_file);
        config.index = index_dir;
        if (!bind.empty()) {
          std::istringstream line("bind = " + bind);
          const auto parsed = ApiConfig::parse(line);
          config.host = parsed.host;
          config.port = parsed.port;
        }
        config.validate();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidConfig) throw;
        throw UsageError(e.what());
      }
      return cmd_serve(config);
    }
    if (*resolve) return cmd_resolve(oci_text, format, resolve_index);
    if (*stats) return cmd_stats(index_dir, publishers, json);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidConfig ? kUsage : kFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kUsage;
}
