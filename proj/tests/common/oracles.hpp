#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They are deliberately naive: linear scans, full sorts and string
// concatenation, sharing no code with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"
#include "misinfo/embeddings.hpp"
#include "misinfo/engine.hpp"
#include "misinfo/entity_swap.hpp"
#include "misinfo/eval.hpp"

namespace oracle {

using misinfo::RecordId;

/// Seeded generator for property tests; independent of the library's RNG.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  std::size_t range(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }
  float real(float lo, float hi) {
    return lo + (hi - lo) * static_cast<float>(static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("misinfo-test-" + std::to_string(std::random_device{}()) + "-" +
                      std::to_string(counter++));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// --- nearest neighbour -----------------------------------------------------

struct NnQuery {
  RecordId query = 0;
  misinfo::Modality query_space = misinfo::Modality::Image;
  misinfo::Modality candidate_space = misinfo::Modality::Image;
  std::unordered_set<RecordId> exclude;
  std::function<bool(RecordId)> predicate;
  bool exclude_identical_captions = false;
};

/// Every admissible candidate of the query's topic, best first. Scores are a
/// plain left-to-right double sum; ties go to the lower id.
inline std::vector<std::pair<RecordId, double>> ranked_candidates(
    const misinfo::Corpus& corpus, const misinfo::EmbeddingStore* image,
    const misinfo::EmbeddingStore* text, const NnQuery& q) {
  const auto store_for = [&](misinfo::Modality m) {
    return m == misinfo::Modality::Image ? image : text;
  };
  const misinfo::NewsRecord& qr = corpus.at(q.query);
  const auto qv = store_for(q.query_space)->vector(q.query);
  const bool identical = q.exclude_identical_captions || q.query_space == misinfo::Modality::Text ||
                         q.candidate_space == misinfo::Modality::Text;
  std::vector<std::pair<RecordId, double>> out;
  for (const misinfo::NewsRecord& r : corpus.records()) {
    if (r.topic != qr.topic || r.id == q.query || q.exclude.count(r.id)) continue;
    if (identical && r.caption == qr.caption) continue;
    if (q.predicate && !q.predicate(r.id)) continue;
    const auto cv = store_for(q.candidate_space)->vector(r.id);
    double s = 0.0;
    for (std::size_t i = 0; i < cv.size(); ++i) s += double(qv[i]) * double(cv[i]);
    s = std::clamp(s, -1.0, 1.0);
    out.emplace_back(r.id, s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

// --- text splicing ---------------------------------------------------------

/// Rebuilds a caption from the unchanged segments and the new surfaces.
inline std::string splice(const std::string& caption,
                          const std::vector<misinfo::Replacement>& replacements) {
  // Decode scalar starts by hand.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < caption.size(); ++i) {
    if ((static_cast<unsigned char>(caption[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  starts.push_back(caption.size());
  std::string out;
  std::size_t cursor = 0;
  for (const auto& r : replacements) {
    out += caption.substr(cursor, starts[r.span.start] - cursor);
    out += r.new_surface;
    cursor = starts[r.span.end];
  }
  out += caption.substr(cursor);
  return out;
}

/// Scalar offsets of a caption, counted by hand.
inline std::string scalar_substr(const std::string& s, std::size_t start, std::size_t end) {
  std::string out;
  std::size_t scalar = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool lead = (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80;
    if (lead && i != 0) ++scalar;
    if (scalar >= start && scalar < end) out += s[i];
  }
  return out;
}

/// Text between entity spans, in order: one more gap than spans.
inline std::vector<std::string> gaps_of(const std::string& caption,
                                        const std::vector<misinfo::EntitySpan>& spans) {
  std::size_t scalars = 0;
  for (const char c : caption) scalars += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  std::vector<std::string> gaps;
  std::size_t cursor = 0;
  for (const auto& e : spans) {
    gaps.push_back(scalar_substr(caption, cursor, e.start));
    cursor = e.end;
  }
  gaps.push_back(scalar_substr(caption, cursor, scalars));
  return gaps;
}

/// True when `text` can be read as gap0 c1 gap1 c2 ... gapN with each ci
/// drawn from allowed[i-1]. Backtracks over every choice.
inline bool parses(const std::string& text, const std::vector<std::string>& gaps,
                   const std::vector<std::set<std::string>>& allowed, std::size_t span = 0,
                   std::size_t pos = 0) {
  const std::string& gap = gaps[span];
  if (text.compare(pos, gap.size(), gap) != 0) return false;
  pos += gap.size();
  if (span == allowed.size()) return pos == text.size();
  for (const std::string& c : allowed[span]) {
    if (text.compare(pos, c.size(), c) == 0 && parses(text, gaps, allowed, span + 1, pos + c.size())) {
      return true;
    }
  }
  return false;
}

/// Reviewer-style check of one NEI caption. `allowed[i]` lists the surfaces
/// span i may legally carry after the swap (same type by construction of the
/// caller). Returns an empty string on success, a reason otherwise.
inline std::string check_swap(const std::string& original, const std::string& falsified,
                              const std::vector<misinfo::EntitySpan>& spans,
                              const std::vector<std::set<std::string>>& allowed) {
  if (original == falsified) return "caption unchanged";
  if (spans.empty()) return "source has no entities";
  if (!parses(falsified, gaps_of(original, spans), allowed)) {
    return "falsified caption is not the original with type-preserving substitutions";
  }
  return {};
}

/// Manual pairwise swap: per type, the i-th source span takes donor surface i mod m.
inline std::optional<std::string> pairwise(const std::string& caption,
                                           const std::vector<misinfo::EntitySpan>& spans,
                                           const std::vector<misinfo::EntitySpan>& donor) {
  std::map<misinfo::EntityType, std::vector<std::string>> by_type;
  for (const auto& d : donor) by_type[d.type].push_back(d.surface);
  std::map<misinfo::EntityType, std::size_t> seen;
  std::vector<misinfo::Replacement> reps;
  bool changed = false;
  for (const auto& s : spans) {
    auto it = by_type.find(s.type);
    if (it == by_type.end()) continue;
    const std::string& surface = it->second[seen[s.type]++ % it->second.size()];
    changed = changed || surface != s.surface;
    reps.push_back({s, s.surface, surface, std::nullopt});
  }
  if (!changed) return std::nullopt;
  return splice(caption, reps);
}

// --- metrics ---------------------------------------------------------------

struct Rates {
  double accuracy, specificity, sensitivity;
};

inline Rates rates(std::size_t tt, std::size_t tf, std::size_t ft, std::size_t ff) {
  const double n = double(tt + tf + ft + ff);
  return {n == 0 ? 0.0 : double(tt + ff) / n, tt + tf == 0 ? 0.0 : double(tt) / double(tt + tf),
          ff + ft == 0 ? 0.0 : double(ff) / double(ff + ft)};
}

/// Benchmark plus predictions realising the given confusion counts.
inline std::pair<std::vector<misinfo::EvalItem>, std::vector<misinfo::Prediction>> fixture(
    std::size_t tt, std::size_t tf, std::size_t ft, std::size_t ff, Gen& gen) {
  using misinfo::BinaryLabel;
  using misinfo::PredictedLabel;
  std::vector<misinfo::EvalItem> items;
  std::vector<misinfo::Prediction> preds;
  const auto falsified = [&] {
    const std::uint64_t r = gen.below(3);
    return r == 0 ? PredictedLabel::OOC : r == 1 ? PredictedLabel::NEI : PredictedLabel::Falsified;
  };
  std::uint64_t id = 0;
  const auto add = [&](std::size_t count, BinaryLabel truth, bool predict_truthful) {
    for (std::size_t i = 0; i < count; ++i, ++id) {
      items.push_back({id, "img-" + std::to_string(id), "caption " + std::to_string(id), truth});
      preds.push_back({id, predict_truthful ? PredictedLabel::Truthful : falsified(), {}});
    }
  };
  add(tt, BinaryLabel::Truthful, true);
  add(tf, BinaryLabel::Truthful, false);
  add(ft, BinaryLabel::Falsified, true);
  add(ff, BinaryLabel::Falsified, false);
  for (std::size_t i = preds.size(); i > 1; --i) std::swap(preds[i - 1], preds[gen.below(i)]);
  return {items, preds};
}

}  // namespace oracle
