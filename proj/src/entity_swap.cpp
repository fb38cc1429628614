#include "misinfo/entity_swap.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "misinfo/error.hpp"
#include "misinfo/seed.hpp"
#include "misinfo/utf8.hpp"

namespace misinfo {

EntityPool::EntityPool(const Annotations& annotations, const TopicIndex& topics) {
  for (const std::string& topic : topics.topics()) {
    PerType& per_type = pools_[topic];
    for (const RecordId id : topics.bucket(topic)) {
      for (const EntitySpan& s : annotations.entities(id)) {
        per_type[static_cast<std::size_t>(s.type)].push_back({s.surface, id});
      }
    }
    for (auto& entries : per_type) {
      std::sort(entries.begin(), entries.end(), [](const PoolEntry& a, const PoolEntry& b) {
        return std::tie(a.surface, a.source_id) < std::tie(b.surface, b.source_id);
      });
    }
  }
}

std::span<const PoolEntry> EntityPool::entries(std::string_view topic, EntityType type) const {
  const auto it = pools_.find(topic);
  if (it == pools_.end()) return {};
  return it->second[static_cast<std::size_t>(type)];
}

namespace {

// Half-open range of entries whose surface equals `surface`.
std::pair<std::size_t, std::size_t> surface_range(std::span<const PoolEntry> entries,
                                                  std::string_view surface) {
  const auto lo = std::lower_bound(entries.begin(), entries.end(), surface,
                                   [](const PoolEntry& e, std::string_view s) { return e.surface < s; });
  const auto hi = std::upper_bound(lo, entries.end(), surface,
                                   [](std::string_view s, const PoolEntry& e) { return s < e.surface; });
  return {static_cast<std::size_t>(lo - entries.begin()),
          static_cast<std::size_t>(hi - entries.begin())};
}

}  // namespace

std::size_t EntityPool::count(std::string_view topic, EntityType type,
                              std::string_view surface) const {
  const auto [lo, hi] = surface_range(entries(topic, type), surface);
  return hi - lo;
}

std::string apply_replacements(std::string_view caption,
                               std::span<const Replacement> replacements) {
  const auto bounds = utf8::scalar_boundaries(caption);
  if (bounds.empty() && !caption.empty()) {
    throw Error(ErrorCode::InvalidArgument, "caption is not valid UTF-8");
  }
  const std::size_t length = bounds.empty() ? 0 : bounds.size() - 1;
  std::size_t previous_end = 0;
  for (const Replacement& r : replacements) {
    if (r.span.start < previous_end || r.span.start > r.span.end) {
      throw Error(ErrorCode::OverlappingSpans,
                  "span [" + std::to_string(r.span.start) + "," + std::to_string(r.span.end) + ")");
    }
    if (r.span.end > length) {
      throw Error(ErrorCode::InvalidArgument, "span end " + std::to_string(r.span.end) +
                                                  " past caption length " + std::to_string(length));
    }
    previous_end = r.span.end;
  }
  std::string out(caption);
  for (auto it = replacements.rbegin(); it != replacements.rend(); ++it) {
    const std::size_t begin = bounds[it->span.start];
    const std::size_t end = bounds[it->span.end];
    out.replace(begin, end - begin, it->new_surface);
  }
  return out;
}

SwapResult random_swap(const NewsRecord& record, std::span<const EntitySpan> entities,
                       const EntityPool& pool, std::uint64_t seed) {
  SplitMix64 rng(seed);
  SwapResult result;
  for (const EntitySpan& span : entities) {
    const auto candidates = pool.entries(record.topic, span.type);
    const auto [lo, hi] = surface_range(candidates, span.surface);
    const std::size_t admissible = candidates.size() - (hi - lo);
    if (admissible == 0) continue;
    std::size_t pick = uniform_below(rng, admissible);
    if (pick >= lo) pick += hi - lo;
    const PoolEntry& e = candidates[pick];
    result.replacements.push_back({span, span.surface, e.surface, e.source_id});
  }
  if (result.replacements.empty()) {
    throw Error(ErrorCode::NoAdmissibleReplacement, "record " + std::to_string(record.id));
  }
  result.falsified_caption = apply_replacements(record.caption, result.replacements);
  if (result.falsified_caption == record.caption) {
    throw Error(ErrorCode::NoAdmissibleReplacement,
                "record " + std::to_string(record.id) + ": replacements reproduce the caption");
  }
  return result;
}

SwapResult pairwise_swap(const NewsRecord& record, std::span<const EntitySpan> entities,
                         const NewsRecord& donor, std::span<const EntitySpan> donor_entities) {
  std::array<std::vector<const EntitySpan*>, kEntityTypes.size()> donor_by_type;
  for (const EntitySpan& s : donor_entities) {
    donor_by_type[static_cast<std::size_t>(s.type)].push_back(&s);
  }
  std::array<std::size_t, kEntityTypes.size()> seen{};
  SwapResult result;
  bool changed = false;
  for (const EntitySpan& span : entities) {
    const auto t = static_cast<std::size_t>(span.type);
    const auto& sources = donor_by_type[t];
    if (sources.empty()) continue;
    const EntitySpan& from = *sources[seen[t]++ % sources.size()];
    changed = changed || from.surface != span.surface;
    result.replacements.push_back({span, span.surface, from.surface, donor.id});
  }
  const std::string pair = "records " + std::to_string(record.id) + " and " + std::to_string(donor.id);
  if (result.replacements.empty()) {
    throw Error(ErrorCode::InadmissiblePair, pair + ": no shared entity type");
  }
  if (!changed) {
    throw Error(ErrorCode::InadmissiblePair, pair + ": shared entities are identical");
  }
  result.falsified_caption = apply_replacements(record.caption, result.replacements);
  if (result.falsified_caption == record.caption) {
    throw Error(ErrorCode::InadmissiblePair, pair + ": swap reproduces the caption");
  }
  return result;
}

}  // namespace misinfo
