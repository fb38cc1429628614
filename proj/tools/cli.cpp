#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"
#include "misinfo/dataset.hpp"
#include "misinfo/embeddings.hpp"
#include "misinfo/engine.hpp"
#include "misinfo/error.hpp"
#include "misinfo/eval.hpp"
#include "misinfo/external.hpp"
#include "misinfo/mock.hpp"
#include "misinfo/similarity.hpp"

namespace misinfo::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

/// Thrown for flag combinations CLI11 cannot express; exits with code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void configure_logging() {
  auto logger = spdlog::get("misinfo-forge");
  if (!logger) logger = spdlog::stderr_color_mt("misinfo-forge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("MISINFO_FORGE_LOG");
  if (env == nullptr) return;
  const std::string level(env);
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::warn("ignoring MISINFO_FORGE_LOG={} (expected error, warn, info or debug)", level);
  }
}

struct Options {
  std::string corpus;
  std::string image_embeddings;
  std::string text_embeddings;
  std::string entities;
  std::string strategy;
  std::uint64_t seed = 0;
  std::uint32_t retry_budget = 10;
  std::string balance;
  unsigned workers = 0;
  std::string out;
  std::string split = "train";
  std::optional<std::size_t> dim;
  std::vector<std::string> topk_caches;

  // index
  std::string space = "text";
  std::size_t topk = 0;
  // combine
  std::string ooc;
  std::string nei;
  // stats / report
  std::vector<std::string> datasets;
  std::vector<std::string> reports;
  // mock-embed / mock-corpus
  std::string modality = "text";
  std::size_t records = 1000;
  std::size_t topics = 10;
  double duplicate_rate = 0.01;
  double val_fraction = 0.0;
  std::string entities_out;
  // import
  std::string format;
  std::string input;
  // evaluate / report
  std::string benchmark;
  std::string predictions;
  std::string eval_modality = "multimodal";
  std::string layout = "table3";
};

Corpus load_split(const Options& o) {
  const Corpus full = load_corpus(o.corpus);
  if (o.split == "all") return full;
  return full.filter_split(parse_split(o.split));
}

std::string describe(const ClassCounts& c) {
  return fmt::format("truthful={} ooc={} nei={}", c.truthful, c.ooc, c.nei);
}

void write_manifest(const Manifest& m, const fs::path& dataset) {
  save_manifest(m, manifest_path_for(dataset));
  std::cout << fmt::format("wrote {} ({} records: {}) sha256={}\n", dataset.string(), m.records,
                           describe(m.counts), m.checksum);
}

// ---------------------------------------------------------------------------

int cmd_index(const Options& o) {
  const Corpus corpus = load_split(o);
  const TopicIndex topics(corpus);
  if (o.topk == 0) {
    std::cout << fmt::format("{} records in {} topics\n", corpus.size(), topics.topic_count());
    for (const std::string& t : topics.topics()) {
      std::cout << fmt::format("{}\t{}\n", t, topics.bucket(t).size());
    }
    return 0;
  }
  if (o.out.empty()) throw UsageError("index --topk requires --out");
  const Modality space = parse_modality(o.space);
  const std::string& path = space == Modality::Image ? o.image_embeddings : o.text_embeddings;
  if (path.empty()) {
    throw UsageError(fmt::format("index --space {} requires --{}-embeddings", o.space, o.space));
  }
  const EmbeddingStore store = load_embeddings(path, o.dim);
  const SimilarityIndex index(corpus, topics, space == Modality::Image ? &store : nullptr,
                              space == Modality::Text ? &store : nullptr);
  const TopKCache cache = TopKCache::build(index, space, space, o.topk, o.workers);
  save_topk_cache(cache, o.out);
  std::cout << fmt::format("wrote {} ({} queries, k={})\n", o.out, cache.size(), cache.k());
  return 0;
}

int cmd_generate(const Options& o) {
  const auto kind = parse_strategy_kind(o.strategy);
  if (!kind) throw UsageError("unknown strategy '" + o.strategy + "'");
  const BalanceMode balance = parse_balance_mode(o.balance.empty() ? "keep-all" : o.balance);
  const Split split = parse_split(o.split);

  const Corpus corpus = load_corpus(o.corpus).filter_split(split);
  const TopicIndex topics(corpus);
  std::optional<EmbeddingStore> image, text;
  std::optional<Annotations> annotations;
  std::vector<TopKCache> caches;
  if (needs_embeddings(*kind)) {
    if (!o.image_embeddings.empty()) image.emplace(load_embeddings(o.image_embeddings, o.dim));
    if (!o.text_embeddings.empty()) text.emplace(load_embeddings(o.text_embeddings, o.dim));
    for (const std::string& c : o.topk_caches) caches.push_back(load_topk_cache(c));
  }
  if (needs_annotations(*kind) && !o.entities.empty()) {
    annotations.emplace(load_annotations(o.entities, load_corpus(o.corpus)));
  }

  GenerationInputs inputs;
  inputs.corpus = &corpus;
  inputs.topics = &topics;
  inputs.image_embeddings = image ? &*image : nullptr;
  inputs.text_embeddings = text ? &*text : nullptr;
  inputs.annotations = annotations ? &*annotations : nullptr;
  for (const TopKCache& c : caches) inputs.caches.push_back(&c);

  const Strategy strategy{*kind, o.seed, o.retry_budget};
  const GenerationResult result = generate(inputs, strategy, {balance, o.workers});

  RunInfo run;
  run.strategy = std::string(to_string(*kind));
  run.seed = o.seed;
  if (produces_nei(*kind) && *kind != StrategyKind::R_NESt) run.retry_budget = o.retry_budget;
  run.balance = std::string(to_string(balance));
  run.config = {{"subcommand", "generate"},
                {"corpus", o.corpus},
                {"image_embeddings", o.image_embeddings},
                {"text_embeddings", o.text_embeddings},
                {"entities", o.entities},
                {"strategy", run.strategy},
                {"seed", std::to_string(o.seed)},
                {"retry_budget", std::to_string(o.retry_budget)},
                {"balance", run.balance},
                {"split", o.split},
                {"out", o.out}};
  const Manifest m = emit_dataset(result.pairs, split, o.out, run);
  write_manifest(m, o.out);
  if (!result.failures.empty()) {
    std::cout << fmt::format("{} source records could not be falsified\n", result.failures.size());
  }
  return 0;
}

std::string strategy_tag(const std::vector<GeneratedPair>& pairs, const std::string& fallback) {
  for (const GeneratedPair& p : pairs) {
    if (p.label != Label::Truthful) return p.provenance.strategy;
  }
  return fallback;
}

int cmd_combine(const Options& o) {
  const HybridBalance balance = parse_hybrid_balance(o.balance.empty() ? "downsample" : o.balance);
  const auto ooc = load_dataset(o.ooc);
  const auto nei = load_dataset(o.nei);
  HybridSpec spec{strategy_tag(ooc, "ooc"), strategy_tag(nei, "nei"), balance, o.seed};
  const auto pairs = combine_hybrid(spec, ooc, nei);

  RunInfo run;
  run.strategy = spec.nei_source + "+" + spec.ooc_source;
  run.seed = o.seed;
  run.balance = std::string(to_string(balance));
  run.config = {{"subcommand", "combine"}, {"ooc", o.ooc},       {"nei", o.nei},
                {"balance", run.balance},  {"seed", std::to_string(o.seed)}, {"split", o.split},
                {"out", o.out}};
  const Manifest m = emit_dataset(pairs, parse_split(o.split), o.out, run);
  write_manifest(m, o.out);
  return 0;
}

int cmd_stats(const Options& o) {
  std::vector<std::pair<std::string, ClassCounts>> rows;
  for (const std::string& d : o.datasets) {
    rows.emplace_back(fs::path(d).stem().string(), dataset_stats(d));
  }
  std::cout << render_stats_table(rows);
  return 0;
}

int cmd_mock_embed(const Options& o) {
  const Corpus corpus = load_corpus(o.corpus);
  const std::size_t dim = o.dim.value_or(64);
  const EmbeddingStore store = mock_embed(corpus, dim, parse_modality(o.modality), o.seed, o.workers);
  save_embeddings(store, o.out);
  std::cout << fmt::format("wrote {} ({} {} vectors, dim {})\n", o.out, store.size(), o.modality, dim);
  return 0;
}

int cmd_mock_corpus(const Options& o) {
  MockCorpusOptions opts;
  opts.records = o.records;
  opts.topics = o.topics;
  opts.seed = o.seed;
  opts.duplicate_rate = o.duplicate_rate;
  opts.val_fraction = o.val_fraction;
  const MockCorpus mock = make_mock_corpus(opts);
  save_corpus(mock.corpus, o.out);
  if (!o.entities_out.empty()) save_annotations(mock.annotations, mock.corpus, o.entities_out);
  std::cout << fmt::format("wrote {} ({} records, {} topics)\n", o.out, mock.corpus.size(),
                           TopicIndex(mock.corpus).topic_count());
  return 0;
}

int cmd_import(const Options& o) {
  const ExternalFormat format = parse_external_format(o.format);
  std::optional<Corpus> corpus;
  if (!o.corpus.empty()) corpus.emplace(load_corpus(o.corpus));
  ImportResult imported = import_external(format, o.input, corpus ? &*corpus : nullptr);
  if (auto* items = std::get_if<std::vector<EvalItem>>(&imported)) {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
    write_benchmark(*items, out);
    std::size_t falsified = 0;
    for (const EvalItem& i : *items) falsified += i.label == BinaryLabel::Falsified;
    std::cout << fmt::format("wrote {} ({} items: truthful={} falsified={})\n", o.out, items->size(),
                             items->size() - falsified, falsified);
    return 0;
  }
  const auto& pairs = std::get<std::vector<GeneratedPair>>(imported);
  RunInfo run;
  run.strategy = std::string(to_string(format));
  run.config = {{"subcommand", "import"}, {"format", run.strategy}, {"in", o.input},
                {"corpus", o.corpus},     {"split", o.split},       {"out", o.out}};
  const Manifest m = emit_dataset(pairs, parse_split(o.split), o.out, run);
  write_manifest(m, o.out);
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto benchmark = load_benchmark(o.benchmark);
  const auto predictions = load_predictions(o.predictions);
  const std::string tag = o.strategy.empty() ? fs::path(o.predictions).stem().string() : o.strategy;
  const EvalReport report = score(benchmark, predictions, tag, parse_eval_modality(o.eval_modality));
  const std::vector<EvalReport> reports{report};
  const std::string path = o.out.empty() ? o.predictions + ".report.json" : o.out;
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
    out << report_to_json(reports);
  }
  const Confusion& c = report.confusion;
  std::cout << fmt::format("n={} TT={} TF={} FT={} FF={}\n", report.n, c.truthful_as_truthful,
                           c.truthful_as_falsified, c.falsified_as_truthful,
                           c.falsified_as_falsified);
  std::cout << render_report(reports, parse_report_layout(o.layout));
  std::cout << fmt::format("wrote {}\n", path);
  return 0;
}

int cmd_report(const Options& o) {
  std::vector<EvalReport> all;
  for (const std::string& path : o.reports) {
    for (EvalReport& r : load_reports(path)) all.push_back(std::move(r));
  }
  if (all.empty()) throw Error(ErrorCode::MissingInput, "no reports to render");
  const std::string table = render_report(all, parse_report_layout(o.layout));
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + o.out);
    out << table;
  }
  std::cout << table;
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  configure_logging();
  CLI::App app{"Synthetic misinformation dataset generation and evaluation", "misinfo-forge"};
  app.set_config("--config", "", "TOML file providing flag values; flags on the command line win");
  app.require_subcommand(1);
  Options o;

  const std::vector<std::string> kStrategies = {
      "rs-c",  "rst-c",  "rst-i",  "rst-alt", "cst-c", "cst-i", "cst-alt", "r-nest",
      "clip-nest-c", "clip-nest-i", "clip-nest-alt"};

  auto* index = app.add_subcommand("index", "Show topic buckets or build a top-k candidate cache");
  index->add_option("--corpus", o.corpus, "Corpus file")->required();
  index->add_option("--split", o.split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  index->add_option("--image-embeddings", o.image_embeddings, "Image embedding store");
  index->add_option("--text-embeddings", o.text_embeddings, "Text embedding store");
  index->add_option("--space", o.space, "Similarity space for the cache")
      ->check(CLI::IsMember({"image", "text"}));
  index->add_option("--topk", o.topk, "Cache depth; 0 prints bucket sizes only");
  index->add_option("--dim", o.dim, "Expected embedding dimension");
  index->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  index->add_option("--out", o.out, "Cache file (MFTK)");

  auto* gen = app.add_subcommand("generate", "Run one synthetic misinformer over a corpus split");
  gen->add_option("--corpus", o.corpus, "Corpus file")->required();
  gen->add_option("--image-embeddings", o.image_embeddings, "Image embedding store");
  gen->add_option("--text-embeddings", o.text_embeddings, "Text embedding store");
  gen->add_option("--entities", o.entities, "Entity annotation file");
  gen->add_option("--strategy", o.strategy, "Misinformer")
      ->required()
      ->transform(CLI::IsMember(kStrategies, CLI::ignore_case));
  gen->add_option("--seed", o.seed, "Run seed");
  gen->add_option("--retry-budget", o.retry_budget, "Candidate ranks tried for CLIP-NESt")
      ->check(CLI::PositiveNumber);
  gen->add_option("--balance", o.balance, "keep-all or balanced")
      ->check(CLI::IsMember({"keep-all", "balanced"}));
  gen->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  gen->add_option("--split", o.split, "Source split")->check(CLI::IsMember({"train", "val", "test"}));
  gen->add_option("--dim", o.dim, "Expected embedding dimension");
  gen->add_option("--topk-cache", o.topk_caches, "Candidate cache files (MFTK)");
  gen->add_option("--out", o.out, "Dataset file")->required();

  auto* combine = app.add_subcommand("combine", "Merge an OOC and an NEI dataset into a hybrid");
  combine->add_option("--ooc", o.ooc, "Dataset with truthful and OOC pairs")->required();
  combine->add_option("--nei", o.nei, "Dataset with truthful and NEI pairs")->required();
  combine->add_option("--balance", o.balance, "none or downsample")
      ->check(CLI::IsMember({"none", "downsample"}));
  combine->add_option("--seed", o.seed, "Down-sampling seed");
  combine->add_option("--split", o.split, "Split recorded in the manifest")
      ->check(CLI::IsMember({"train", "val", "test"}));
  combine->add_option("--out", o.out, "Dataset file")->required();

  auto* stats = app.add_subcommand("stats", "Per-class counts of dataset files");
  stats->add_option("--dataset,datasets", o.datasets, "Dataset files")->required();

  auto* membed = app.add_subcommand("mock-embed", "Deterministic stand-in embeddings");
  membed->add_option("--corpus", o.corpus, "Corpus file")->required();
  membed->add_option("--dim", o.dim, "Embedding dimension (>= 8)");
  membed->add_option("--modality", o.modality, "image or text")->check(CLI::IsMember({"image", "text"}));
  membed->add_option("--seed", o.seed, "Seed");
  membed->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  membed->add_option("--out", o.out, "Embedding store (MFEB)")->required();

  auto* mcorpus = app.add_subcommand("mock-corpus", "Synthetic corpus with entity annotations");
  mcorpus->add_option("--records", o.records, "Number of records");
  mcorpus->add_option("--topics", o.topics, "Number of topics");
  mcorpus->add_option("--seed", o.seed, "Seed");
  mcorpus->add_option("--duplicate-rate", o.duplicate_rate, "Share of repeated captions")
      ->check(CLI::Range(0.0, 1.0));
  mcorpus->add_option("--val-fraction", o.val_fraction, "Share of validation records")
      ->check(CLI::Range(0.0, 1.0));
  mcorpus->add_option("--out", o.out, "Corpus file")->required();
  mcorpus->add_option("--entities-out", o.entities_out, "Annotation file");

  auto* imp = app.add_subcommand("import", "Normalize an external dataset");
  imp->add_option("--format", o.format, "newsclippings, meir or cosmos-test")->required();
  imp->add_option("--in", o.input, "External file")->required();
  imp->add_option("--corpus", o.corpus, "Corpus for resolving NewsCLIPings captions");
  imp->add_option("--split", o.split, "Split recorded in the manifest")
      ->check(CLI::IsMember({"train", "val", "test"}));
  imp->add_option("--out", o.out, "Dataset or benchmark file")->required();

  auto* eval = app.add_subcommand("evaluate", "Score predictions against a benchmark");
  eval->add_option("--benchmark", o.benchmark, "Benchmark items")->required();
  eval->add_option("--predictions", o.predictions, "Prediction file")->required();
  eval->add_option("--strategy", o.strategy, "Strategy tag for the report");
  eval->add_option("--modality", o.eval_modality, "image-only, text-only or multimodal")
      ->check(CLI::IsMember({"image-only", "text-only", "multimodal"}));
  eval->add_option("--layout", o.layout, "table2 or table3")->check(CLI::IsMember({"table2", "table3"}));
  eval->add_option("--out", o.out, "Report file (JSON); defaults to <predictions>.report.json");

  auto* report = app.add_subcommand("report", "Render saved reports as a table");
  report->add_option("--reports,reports", o.reports, "Report files")->required();
  report->add_option("--layout", o.layout, "table2 or table3")->check(CLI::IsMember({"table2", "table3"}));
  report->add_option("--out", o.out, "Write the table here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*index) return cmd_index(o);
    if (*gen) return cmd_generate(o);
    if (*combine) return cmd_combine(o);
    if (*stats) return cmd_stats(o);
    if (*membed) return cmd_mock_embed(o);
    if (*mcorpus) return cmd_mock_corpus(o);
    if (*imp) return cmd_import(o);
    if (*eval) return cmd_evaluate(o);
    if (*report) return cmd_report(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::MissingInput ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace misinfo::cli
