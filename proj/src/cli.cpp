#include "prospect/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "prospect/corpus.hpp"
#include "prospect/error.hpp"
#include "prospect/query.hpp"
#include "prospect/report.hpp"
#include "prospect/segment.hpp"
#include "prospect/topics.hpp"

namespace prospect::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct IngestOptions {
  std::string format;
  std::string input;
  std::string out;
};

struct BuildOptions {
  std::string corpus;
  std::string mode = "utterances";
  std::string embedder = "lexical";
  std::size_t dim = 64;
  std::string service_url;
  std::uint64_t seed = 42;
  std::size_t batch_size = 64;
  std::size_t n_components = 5;
  std::size_t min_cluster_size = 10;
  std::size_t min_samples = 5;
  double merge_threshold = 0.915;
  std::string stopwords;
  std::string out;
};

struct QueryOptions {
  std::string model;
  std::string keywords;
  std::size_t top_k = 5;
  std::string service_url;
  std::string out;
};

struct ReportOptions {
  std::string hits;
  std::string table;
  std::string table_out;
  std::string turn_histogram;
};

std::optional<std::string> service_url_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PROSPECT_EMBED_URL"); env && *env) return std::string(env);
  return std::nullopt;
}

void log_params(std::ostream& err, const char* command, const ojson& params) {
  err << "prospect " << command << ": effective parameters " << params.dump() << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void run_ingest(const IngestOptions& o, std::ostream& err) {
  log_params(err, "ingest", {{"format", o.format}, {"input", o.input}, {"out", o.out}});
  const Corpus corpus = o.format == "sgd" ? load_sgd(o.input) : load_multiwoz(o.input);
  save_normalized(corpus, o.out);
  err << "prospect ingest: " << corpus.size() << " dialogues, " << corpus.turn_count()
      << " turns (" << corpus.detected_shape() << ") -> " << o.out << '\n';
}

void run_build(const BuildOptions& o, std::ostream& err) {
  EmbedderConfig cfg;
  cfg.kind = parse_embedder_kind(o.embedder);
  cfg.dim = o.dim;
  cfg.seed = o.seed;
  cfg.batch_size = o.batch_size;
  if (cfg.kind == EmbedderKind::Service) cfg.service_url = service_url_or_env(o.service_url);

  FitParams params;
  params.n_components = o.n_components;
  params.min_cluster_size = o.min_cluster_size;
  params.min_samples = o.min_samples;
  params.merge_threshold = o.merge_threshold;
  params.seed = o.seed;

  log_params(err, "build",
             {{"corpus", o.corpus},
              {"mode", o.mode},
              {"embedder", o.embedder},
              {"dim", o.dim},
              {"service_url", cfg.service_url.value_or("")},
              {"seed", o.seed},
              {"batch_size", o.batch_size},
              {"n_components", o.n_components},
              {"min_cluster_size", o.min_cluster_size},
              {"min_samples", o.min_samples},
              {"merge_threshold", o.merge_threshold},
              {"stopwords", o.stopwords.empty() ? "builtin" : o.stopwords},
              {"out", o.out}});

  params.validate();
  const auto provider = make_embedder(cfg);
  const Corpus corpus = load_normalized(o.corpus);
  const StopwordList stopwords =
      o.stopwords.empty() ? StopwordList::english() : StopwordList(WordSet::load(o.stopwords));
  auto docs = build_documents(corpus, parse_document_mode(o.mode), *provider, stopwords);
  err << "prospect build: " << docs.size() << " documents from " << corpus.turn_count()
      << " turns\n";
  const auto model = fit(std::move(docs), *provider, cfg, params);
  export_model(model, o.out);
  err << "prospect build: " << model.topics.size() << " topics, "
      << model.assignment.noise_count() << " noise documents -> " << o.out << '\n';
}

void run_query(const QueryOptions& o, std::ostream& out, std::ostream& err) {
  const auto model = import_model(o.model);
  EmbedderConfig cfg = model.embedder;
  if (cfg.kind == EmbedderKind::Service) {
    if (auto url = service_url_or_env(o.service_url)) cfg.service_url = url;
  }
  const KeywordSet keywords = o.keywords.empty() ? KeywordSet::defaults() : KeywordSet::parse(o.keywords);
  ojson kw = ojson::array();
  for (const auto& k : keywords.keywords()) kw.push_back(k);
  log_params(err, "query",
             {{"model", o.model},
              {"keywords", kw},
              {"top_k", o.top_k},
              {"embedder", to_string(cfg.kind)},
              {"seed", cfg.seed},
              {"out", o.out.empty() ? "-" : o.out}});

  const auto provider = make_embedder(cfg);
  const auto hits = query(model, keywords, *provider, o.top_k);
  if (o.out.empty()) {
    write_hits(hits, out);
  } else {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw IoError("cannot write '" + o.out + "'");
    write_hits(hits, file);
  }
  err << "prospect query: " << hits.size() << " hits for " << keywords.keywords().size()
      << " keywords\n";
}

void run_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  log_params(err, "report",
             {{"hits", o.hits},
              {"table", o.table},
              {"table_out", o.table_out},
              {"turn_histogram", o.turn_histogram}});
  std::ifstream in(o.hits, std::ios::binary);
  if (!in) throw IoError("cannot open '" + o.hits + "'");
  const auto hits = read_hits(in, o.hits);
  if (!o.table.empty()) {
    const auto table = render_table(hits, parse_table_format(o.table));
    if (o.table_out.empty()) {
      out << table;
    } else {
      write_text_file(o.table_out, table);
    }
  }
  if (!o.turn_histogram.empty()) {
    write_text_file(o.turn_histogram, histogram_csv(turn_distribution(hits)));
  }
}

void ensure_stderr_logger() {
  static const bool once = [] {
    auto logger = spdlog::stderr_logger_mt("prospect-cli");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mine task-oriented dialogue corpora for chit-chat sequences", "prospect"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize an SGD or MultiWOZ corpus to JSON-lines");
  ingest_cmd->add_option("--format", ingest.format, "Source format")
      ->required()
      ->check(CLI::IsMember({"sgd", "multiwoz"}));
  ingest_cmd->add_option("--input", ingest.input, "Source file or directory")->required();
  ingest_cmd->add_option("--out", ingest.out, "Normalized corpus file")->required();

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build", "Segment a corpus and fit the topic model");
  build_cmd->add_option("--corpus", build.corpus, "Normalized corpus (JSON-lines)")->required();
  build_cmd->add_option("--mode", build.mode, "Document granularity")
      ->check(CLI::IsMember({"utterances", "filtered-clauses"}))
      ->capture_default_str();
  build_cmd->add_option("--embedder", build.embedder, "Embedding provider")
      ->check(CLI::IsMember({"lexical", "service"}))
      ->capture_default_str();
  build_cmd->add_option("--dim", build.dim, "Lexical embedding dimension")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  build_cmd->add_option("--service-url", build.service_url,
                        "Embedding service base URL (falls back to PROSPECT_EMBED_URL)");
  build_cmd->add_option("--seed", build.seed, "Seed for every randomized component")->capture_default_str();
  build_cmd->add_option("--batch-size", build.batch_size, "Texts per service request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  build_cmd->add_option("--n-components", build.n_components, "Reduced dimensionality")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  build_cmd->add_option("--min-cluster-size", build.min_cluster_size, "Smallest cluster")
      ->check(CLI::Range(2, 1 << 30))
      ->capture_default_str();
  build_cmd->add_option("--min-samples", build.min_samples, "Neighbourhood size for core distances")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  build_cmd->add_option("--merge-threshold", build.merge_threshold, "Topic merge similarity")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  build_cmd->add_option("--stopwords", build.stopwords, "Stopword list file (one word per line)");
  build_cmd->add_option("--out", build.out, "Model artifact directory")->required();

  QueryOptions query_opts;
  auto* query_cmd = app.add_subcommand("query", "Rank topics against chit-chat keywords");
  query_cmd->add_option("--model", query_opts.model, "Model artifact directory")->required();
  query_cmd->add_option("--keywords", query_opts.keywords,
                        "Semicolon-separated keyword phrases (default: the five built-in phrases)");
  query_cmd->add_option("--top-k", query_opts.top_k, "Topics per keyword")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  query_cmd->add_option("--service-url", query_opts.service_url,
                        "Embedding service base URL for service-built models");
  query_cmd->add_option("--out", query_opts.out, "Hits JSON file (default: stdout)");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Render hits as tables and a turn histogram");
  report_cmd->add_option("--hits", report.hits, "Hits JSON file")->required();
  report_cmd->add_option("--table", report.table, "Table format")->check(CLI::IsMember({"md", "csv"}));
  report_cmd->add_option("--table-out", report.table_out, "Write the table here instead of stdout");
  report_cmd->add_option("--turn-histogram", report.turn_histogram, "Turn histogram CSV file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "prospect: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*ingest_cmd) run_ingest(ingest, err);
    if (*build_cmd) run_build(build, err);
    if (*query_cmd) run_query(query_opts, out, err);
    if (*report_cmd) run_report(report, out, err);
  } catch (const std::exception& e) {
    err << "prospect: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  ensure_stderr_logger();
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace prospect::cli
