#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "misinfo/corpus.hpp"

namespace misinfo {

enum class EntityType : std::uint8_t { PERSON, GPE, LOC, ORG, DATE, TIME, EVENT, NORP, FAC };

inline constexpr std::array<EntityType, 9> kEntityTypes = {
    EntityType::PERSON, EntityType::GPE,   EntityType::LOC,  EntityType::ORG, EntityType::DATE,
    EntityType::TIME,   EntityType::EVENT, EntityType::NORP, EntityType::FAC};

std::string_view to_string(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view text);

/// A typed entity mention. Offsets count Unicode scalar values, end exclusive.
struct EntitySpan {
  EntityType type = EntityType::PERSON;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct AnnotatedCaption {
  RecordId record_id = 0;
  std::vector<EntitySpan> entities;
};

/// Scalar-offset slice of `text`; text must be valid UTF-8 and the range in bounds.
std::string scalar_slice(std::string_view text, std::size_t start, std::size_t end);

/// Checks sortedness, non-overlap, bounds and slice equality against the
/// caption. Throws SpanMismatch naming the offending span.
void validate_spans(const NewsRecord& record, const std::vector<EntitySpan>& spans);

/// Entity annotations for every record of one corpus. Records that had no
/// line in the annotation file carry an empty entity list.
class Annotations {
 public:
  Annotations() = default;
  /// Validates every entry against `corpus`; throws UnknownRecord or SpanMismatch.
  Annotations(const Corpus& corpus, std::vector<AnnotatedCaption> entries);

  /// Empty list for ids without entities (or outside the corpus).
  const std::vector<EntitySpan>& entities(RecordId id) const;
  bool has_entities(RecordId id) const { return !entities(id).empty(); }
  std::size_t annotated_count() const noexcept { return by_id_.size(); }

 private:
  std::unordered_map<RecordId, std::vector<EntitySpan>> by_id_;
};

Annotations read_annotations(std::istream& in, const Corpus& corpus);
Annotations load_annotations(const std::filesystem::path& path, const Corpus& corpus);

/// One line per corpus record, in corpus order.
void write_annotations(const Annotations& annotations, const Corpus& corpus, std::ostream& out);
void save_annotations(const Annotations& annotations, const Corpus& corpus,
                      const std::filesystem::path& path);

}  // namespace misinfo
