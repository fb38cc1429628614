// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails. Every threshold is a named constant.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "misinfo/dataset.hpp"
#include "misinfo/engine.hpp"
#include "misinfo/error.hpp"
#include "misinfo/eval.hpp"
#include "misinfo/mock.hpp"
#include "misinfo/parallel.hpp"
#include "misinfo/similarity.hpp"
#include "oracles.hpp"

using namespace misinfo;
using Clock = std::chrono::steady_clock;

namespace {

// --- pinned tolerances -----------------------------------------------------
constexpr double kNnBudgetSeconds = 10.0;
constexpr std::size_t kNnRecords = 2000, kNnTopics = 10, kNnDim = 64;
constexpr std::size_t kSwapPairs = 10000;
constexpr int kMetricFixtures = 20;
constexpr double kIdentityTolerance = 4 * std::numeric_limits<double>::epsilon();
constexpr double kThroughputBudgetSeconds = 600.0;
constexpr std::size_t kThroughputRecords = 100000, kThroughputDim = 768, kThroughputTopics = 159;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

/// Last `n` whitespace tokens of the first table line that starts with a
/// cell equal to `label` (after an optional leading type column).
std::vector<std::string> row_values(const std::string& table, const std::string& label, std::size_t n) {
  std::istringstream in(table);
  for (std::string line; std::getline(in, line);) {
    const auto t = tokens(line);
    if (t.size() < n) continue;
    std::string name;
    for (std::size_t i = 0; i + n < t.size(); ++i) name += (name.empty() ? "" : " ") + t[i];
    if (name == label || name.ends_with(" " + label)) {
      return {t.end() - static_cast<std::ptrdiff_t>(n), t.end()};
    }
  }
  return {};
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : " / ") + x;
  return s;
}

// --- criteria --------------------------------------------------------------

void nn_oracle() {
  const MockCorpus m = make_mock_corpus({.records = kNnRecords, .topics = kNnTopics, .seed = 2024,
                                         .duplicate_rate = 0.05});
  const EmbeddingStore image = mock_embed(m.corpus, kNnDim, Modality::Image, 1);
  const EmbeddingStore text = mock_embed(m.corpus, kNnDim, Modality::Text, 2);
  const TopicIndex topics(m.corpus);
  const SimilarityIndex index(m.corpus, topics, &image, &text);

  std::size_t queries = 0, mismatches = 0, ties = 0;
  double library_seconds = 0.0;
  oracle::Gen gen(7);
  const Modality spaces[] = {Modality::Image, Modality::Text};
  for (const NewsRecord& r : m.corpus.records()) {
    for (Modality qs : spaces) {
      for (Modality cs : spaces) {
        oracle::NnQuery q;
        q.query = r.id;
        q.query_space = qs;
        q.candidate_space = cs;
        CandidateFilter f;
        const int variant = static_cast<int>(gen.below(3));
        if (variant >= 1) {
          const auto bucket = topics.bucket_of(r.id);
          for (int i = 0; i < 10; ++i) {
            const RecordId x = bucket[gen.below(bucket.size())];
            f.exclude_ids.insert(x);
            q.exclude.insert(x);
          }
        }
        if (variant == 2) {
          f.predicate = [&](RecordId id) { return m.annotations.has_entities(id); };
          q.predicate = f.predicate;
          f.exclude_identical_captions = q.exclude_identical_captions = true;
        }
        const auto expected = oracle::ranked_candidates(m.corpus, &image, &text, q);
        for (std::size_t i = 1; i < expected.size(); ++i) ties += expected[i].second == expected[i - 1].second;
        const auto t0 = Clock::now();
        std::vector<RecordId> top;
        RecordId nearest = 0;
        bool none = false;
        top = index.top_k(r.id, qs, cs, f, 10);
        try {
          nearest = index.nearest_candidate(r.id, qs, cs, f);
        } catch (const Error& e) {
          none = e.code() == ErrorCode::NoCandidate;
        }
        library_seconds += seconds_since(t0);
        ++queries;
        bool ok = top.size() == std::min<std::size_t>(10, expected.size());
        for (std::size_t i = 0; ok && i < top.size(); ++i) ok = top[i] == expected[i].first;
        ok = ok && (expected.empty() ? none : (!none && nearest == expected[0].first));
        mismatches += !ok;
      }
    }
  }
  const bool ok = mismatches == 0 && library_seconds < kNnBudgetSeconds;
  report(ok, "nn-oracle",
         fmt::format("{} queries, {} mismatches, {} tied neighbours, library time {:.2f}s (< {}s)",
                     queries, mismatches, ties, library_seconds, kNnBudgetSeconds));
}

void swap_soundness() {
  const MockCorpus m = make_mock_corpus({.records = 16000, .topics = 40, .seed = 77});
  const EmbeddingStore image = mock_embed(m.corpus, 32, Modality::Image, 3, 0);
  const EmbeddingStore text = mock_embed(m.corpus, 32, Modality::Text, 4, 0);
  const TopicIndex topics(m.corpus);
  GenerationInputs in{&m.corpus, &topics, &image, &text, &m.annotations, {}};

  std::map<std::pair<std::string, EntityType>, std::set<std::string>> pools;
  for (const NewsRecord& r : m.corpus.records()) {
    for (const EntitySpan& e : m.annotations.entities(r.id)) pools[{r.topic, e.type}].insert(e.surface);
  }

  std::size_t checked = 0, bad = 0;
  std::string first_problem;
  for (StrategyKind kind : {StrategyKind::R_NESt, StrategyKind::CLIP_NESt_alt, StrategyKind::CLIP_NESt_C,
                            StrategyKind::CLIP_NESt_I}) {
    const auto result = generate(in, {kind, 5}, {BalanceMode::KeepAll, 0});
    for (const GeneratedPair& p : result.pairs) {
      if (p.label != Label::NEI || checked == kSwapPairs) continue;
      const NewsRecord& src = m.corpus.at(p.provenance.source_id);
      const auto& spans = m.annotations.entities(src.id);
      std::vector<std::set<std::string>> allowed;
      std::string problem;
      if (p.image_id != src.id) problem = "image changed";
      if (kind == StrategyKind::R_NESt) {
        for (const EntitySpan& e : spans) {
          std::set<std::string> a = pools[{src.topic, e.type}];
          a.erase(e.surface);
          if (a.empty()) a.insert(e.surface);
          allowed.push_back(std::move(a));
        }
      } else {
        if (!p.provenance.donor_id) {
          problem = "missing donor";
        } else {
          const NewsRecord& donor = m.corpus.at(*p.provenance.donor_id);
          if (donor.topic != src.topic) problem = "donor outside topic";
          const auto& d = m.annotations.entities(donor.id);
          std::map<EntityType, std::vector<std::string>> by_type;
          for (const EntitySpan& e : d) by_type[e.type].push_back(e.surface);
          std::map<EntityType, std::size_t> seen;
          bool differs = false;
          for (const EntitySpan& e : spans) {
            const auto it = by_type.find(e.type);
            if (it == by_type.end()) {
              allowed.push_back({e.surface});
              continue;
            }
            const std::string& s = it->second[seen[e.type]++ % it->second.size()];
            differs = differs || s != e.surface;
            allowed.push_back({s});
          }
          // Admissibility: a shared type carrying a different entity.
          if (!differs) problem = "no shared type with a different entity";
        }
      }
      if (problem.empty()) problem = oracle::check_swap(src.caption, p.caption, spans, allowed);
      if (!problem.empty()) {
        ++bad;
        if (first_problem.empty()) first_problem = fmt::format("{} ({})", problem, src.id);
      }
      ++checked;
    }
  }
  report(checked == kSwapPairs && bad == 0, "swap-soundness",
         fmt::format("{} NEI pairs checked, {} violations{}", checked, bad,
                     first_problem.empty() ? "" : ": " + first_problem));
}

void balance() {
  const MockCorpus m = make_mock_corpus({.records = 3000, .topics = 12, .seed = 5});
  const EmbeddingStore image = mock_embed(m.corpus, 32, Modality::Image, 1, 0);
  const EmbeddingStore text = mock_embed(m.corpus, 32, Modality::Text, 2, 0);
  const TopicIndex topics(m.corpus);
  GenerationInputs in{&m.corpus, &topics, &image, &text, &m.annotations, {}};
  std::vector<std::string> broken;
  std::map<StrategyKind, std::vector<GeneratedPair>> keep;
  for (StrategyKind kind : kStrategyKinds) {
    const auto r = generate(in, {kind, 11}, {BalanceMode::Balanced, 0});
    const ClassCounts c = count_classes(r.pairs);
    if (c.truthful != c.falsified() || c.truthful == 0) {
      broken.push_back(fmt::format("{} {}:{}", to_string(kind), c.truthful, c.falsified()));
    }
    keep[kind] = generate(in, {kind, 11}, {BalanceMode::KeepAll, 0}).pairs;
  }
  std::size_t hybrid_size = 0;
  const std::pair<StrategyKind, StrategyKind> hybrids[] = {
      {StrategyKind::CSt_alt, StrategyKind::R_NESt}, {StrategyKind::CSt_alt, StrategyKind::CLIP_NESt_alt}};
  for (const auto& [ooc, nei] : hybrids) {
    const auto h = combine_hybrid({std::string(to_string(ooc)), std::string(to_string(nei)),
                                   HybridBalance::Downsample, 3},
                                  keep[ooc], keep[nei]);
    const ClassCounts c = count_classes(h);
    if (c.truthful != c.ooc || c.ooc != c.nei) {
      broken.push_back(fmt::format("{}+{} {}/{}/{}", to_string(nei), to_string(ooc), c.truthful, c.ooc, c.nei));
    }
    hybrid_size = c.nei;
  }
  report(broken.empty(), "balance",
         broken.empty() ? fmt::format("11 strategies balanced 1:1; 2 hybrids equalized (e.g. {} per class)",
                                      hybrid_size)
                        : "unbalanced: " + join(broken));
}

void determinism() {
  const MockCorpus m = make_mock_corpus({.records = 2500, .topics = 10, .seed = 6});
  const EmbeddingStore image = mock_embed(m.corpus, 32, Modality::Image, 1, 0);
  const EmbeddingStore text = mock_embed(m.corpus, 32, Modality::Text, 2, 0);
  const TopicIndex topics(m.corpus);
  GenerationInputs in{&m.corpus, &topics, &image, &text, &m.annotations, {}};
  oracle::TempDir dir;
  std::vector<std::string> problems;
  for (StrategyKind kind : {StrategyKind::RSt_alt, StrategyKind::CSt_alt, StrategyKind::R_NESt,
                            StrategyKind::CLIP_NESt_alt}) {
    std::string dataset, manifest;
    for (unsigned workers : {1u, 4u, 16u}) {
      const auto sub = dir / fmt::format("{}-{}", to_string(kind), workers);
      std::filesystem::create_directory(sub);
      const auto pairs = generate(in, {kind, 42}, {BalanceMode::KeepAll, workers}).pairs;
      RunInfo run{std::string(to_string(kind)), 42, 10, "keep-all", {{"strategy", std::string(to_string(kind))}}};
      const Manifest man = emit_dataset(pairs, Split::Train, sub / "d.jsonl", run);
      save_manifest(man, manifest_path_for(sub / "d.jsonl"));
      const std::string d = oracle::read_bytes(sub / "d.jsonl");
      const std::string mf = oracle::read_bytes(manifest_path_for(sub / "d.jsonl"));
      if (workers == 1) {
        dataset = d;
        manifest = mf;
      } else if (d != dataset || mf != manifest) {
        problems.push_back(fmt::format("{} differs at {} workers", to_string(kind), workers));
      }
    }
    std::set<std::pair<RecordId, std::string>> a, b;
    for (const auto& p : generate(in, {kind, 42}, {BalanceMode::KeepAll, 0}).pairs) {
      if (p.label != Label::Truthful) a.emplace(p.image_id, p.caption);
    }
    for (const auto& p : generate(in, {kind, 43}, {BalanceMode::KeepAll, 0}).pairs) {
      if (p.label != Label::Truthful) b.emplace(p.image_id, p.caption);
    }
    if (a == b) problems.push_back(fmt::format("{} falsified set ignores the seed", to_string(kind)));
  }
  report(problems.empty(), "determinism",
         problems.empty() ? "4 strategies byte-identical (data + manifest) at 1/4/16 workers; seeds 42 vs 43 differ"
                          : join(problems));
}

void metrics() {
  oracle::Gen gen(20240601);
  std::size_t exact = 0;
  double worst_identity = 0.0;
  for (int i = 0; i < kMetricFixtures; ++i) {
    const std::size_t tt = gen.below(400), tf = gen.below(400), ft = gen.below(400), ff = gen.below(400);
    const auto [items, preds] = oracle::fixture(tt, tf, ft, ff, gen);
    const EvalReport r = score(items, preds);
    const oracle::Rates o = oracle::rates(tt, tf, ft, ff);
    exact += r.accuracy == o.accuracy && r.specificity == o.specificity && r.sensitivity == o.sensitivity &&
             r.confusion == Confusion{tt, tf, ft, ff};
    // Balanced benchmark with the same hit counts scaled onto 850/850.
    const std::size_t hit_t = gen.below(851), hit_f = gen.below(851);
    const auto [bi, bp] = oracle::fixture(hit_t, 850 - hit_t, 850 - hit_f, hit_f, gen);
    const EvalReport b = score(bi, bp);
    worst_identity = std::max(worst_identity, std::abs(b.accuracy - (b.specificity + b.sensitivity) / 2));
  }
  const bool bin = binarize(PredictedLabel::OOC) == BinaryLabel::Falsified &&
                   binarize(PredictedLabel::NEI) == BinaryLabel::Falsified &&
                   binarize(PredictedLabel::Truthful) == BinaryLabel::Truthful &&
                   binarize(PredictedLabel::Falsified) == BinaryLabel::Falsified;
  const bool ok = exact == kMetricFixtures && worst_identity <= kIdentityTolerance && bin;
  report(ok, "metrics",
         fmt::format("{}/{} fixtures exact; balanced identity max error {:.1e} (<= {:.1e}); binarize {}",
                     exact, kMetricFixtures, worst_identity, kIdentityTolerance, bin ? "ok" : "wrong"));
}

void report_fidelity() {
  const std::vector<EvalReport> t2{make_report({2854, 778, 886, 2746}, "NC/Bal")};
  const auto row2 = row_values(render_report(t2, ReportLayout::Table2), "NC/Bal", 3);
  const std::vector<std::string> want2{"77.09", "78.58", "75.61"};

  // CLIP-NESt-alt multimodal uses an 849/849 split; see README.
  const std::vector<EvalReport> t3{
      make_report({425, 425, 425, 425}, "CLIP-NESt-alt", EvalModality::ImageOnly),
      make_report({600, 250, 486, 364}, "CLIP-NESt-alt", EvalModality::TextOnly),
      make_report({694, 155, 576, 273}, "CLIP-NESt-alt", EvalModality::Multimodal),
      make_report({436, 414, 414, 436}, "CLIP-NESt-alt + CSt-alt", EvalModality::ImageOnly),
      make_report({449, 401, 401, 449}, "CLIP-NESt-alt + CSt-alt", EvalModality::TextOnly),
      make_report({632, 218, 494, 356}, "CLIP-NESt-alt + CSt-alt", EvalModality::Multimodal)};
  const std::string table3 = render_report(t3, ReportLayout::Table3);
  const auto nest = row_values(table3, "CLIP-NESt-alt", 5);
  const auto hybrid = row_values(table3, "CLIP-NESt-alt + CSt-alt", 5);
  const std::vector<std::string> want_nest{"50.0", "56.7", "56.9", "81.7", "32.2"};
  const std::vector<std::string> want_hybrid{"51.3", "52.8", "58.1", "74.4", "41.9"};
  const bool ok = row2 == want2 && nest == want_nest && hybrid == want_hybrid;
  report(ok, "report-fidelity",
         fmt::format("Table2 NC/Bal [{}]; CLIP-NESt-alt [{}]; hybrid [{}]", join(row2), join(nest),
                     join(hybrid)));
}

void throughput() {
  const auto t0 = Clock::now();
  const MockCorpus m = make_mock_corpus({.records = kThroughputRecords, .topics = kThroughputTopics,
                                         .seed = 159, .duplicate_rate = 0.01});
  const EmbeddingStore image = mock_embed(m.corpus, kThroughputDim, Modality::Image, 1, 0);
  const EmbeddingStore text = mock_embed(m.corpus, kThroughputDim, Modality::Text, 2, 0);
  const TopicIndex topics(m.corpus);
  const double setup = seconds_since(t0);
  GenerationInputs in{&m.corpus, &topics, &image, &text, nullptr, {}};
  const auto t1 = Clock::now();
  const auto r = generate(in, {StrategyKind::CSt_alt, 1}, {BalanceMode::KeepAll, 0});
  const double gen_seconds = seconds_since(t1);
  const ClassCounts c = count_classes(r.pairs);
  const bool ok = gen_seconds < kThroughputBudgetSeconds && c.truthful == kThroughputRecords && c.ooc > 0;
  report(ok, "throughput",
         fmt::format("CSt-alt over {} records, dim {}, {} topics: {:.1f}s generation (< {}s) with {} "
                     "worker(s); setup {:.1f}s; {} OOC pairs",
                     kThroughputRecords, kThroughputDim, topics.topic_count(), gen_seconds,
                     kThroughputBudgetSeconds, default_workers(), setup, c.ooc));
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::pair<const char*, void (*)()> criteria[] = {
      {"nn-oracle", nn_oracle},     {"swap-soundness", swap_soundness}, {"balance", balance},
      {"determinism", determinism}, {"metrics", metrics},               {"report-fidelity", report_fidelity},
      {"throughput", throughput}};
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
