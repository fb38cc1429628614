#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"
#include "misinfo/similarity.hpp"

namespace misinfo {

struct PoolEntry {
  std::string surface;
  RecordId source_id = 0;
  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

/// Multiset of entity surfaces per (topic, type). Duplicates are kept so
/// sampling is frequency-weighted. Entries are sorted by (surface, source id).
class EntityPool {
 public:
  EntityPool() = default;
  EntityPool(const Annotations& annotations, const TopicIndex& topics);

  std::span<const PoolEntry> entries(std::string_view topic, EntityType type) const;
  std::size_t size(std::string_view topic, EntityType type) const {
    return entries(topic, type).size();
  }
  /// Number of pooled occurrences of `surface`.
  std::size_t count(std::string_view topic, EntityType type, std::string_view surface) const;

 private:
  using PerType = std::array<std::vector<PoolEntry>, kEntityTypes.size()>;
  std::map<std::string, PerType, std::less<>> pools_;
};

inline EntityPool build_entity_pool(const Annotations& annotations, const TopicIndex& topics) {
  return EntityPool(annotations, topics);
}

struct Replacement {
  EntitySpan span;  // position and type in the original caption
  std::string old_surface;
  std::string new_surface;
  std::optional<RecordId> new_source_id;
  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct SwapResult {
  std::string falsified_caption;
  std::vector<Replacement> replacements;
  friend bool operator==(const SwapResult&, const SwapResult&) = default;
};

/// Splices replacements into `caption` right to left. Spans must be sorted
/// and non-overlapping (OverlappingSpans otherwise).
std::string apply_replacements(std::string_view caption, std::span<const Replacement> replacements);

/// Replaces every span that has an admissible substitute: a uniform draw from
/// the span's (topic, type) pool excluding occurrences of its own surface.
/// Spans without a substitute stay. Throws NoAdmissibleReplacement when
/// nothing changes.
SwapResult random_swap(const NewsRecord& record, std::span<const EntitySpan> entities,
                       const EntityPool& pool, std::uint64_t seed);

/// For each type present in both captions, the i-th span of that type in
/// `record` takes the (i mod m)-th surface of that type in `donor`.
/// Throws InadmissiblePair when no type is shared or every mapped surface is
/// identical to the one it would replace.
SwapResult pairwise_swap(const NewsRecord& record, std::span<const EntitySpan> entities,
                         const NewsRecord& donor, std::span<const EntitySpan> donor_entities);

}  // namespace misinfo
