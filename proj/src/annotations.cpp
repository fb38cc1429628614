#include "misinfo/annotations.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json_util.hpp"
#include "misinfo/utf8.hpp"

namespace misinfo {

using detail::ojson;

namespace {

constexpr std::array<std::string_view, 9> kTypeNames = {"PERSON", "GPE",   "LOC",  "ORG", "DATE",
                                                        "TIME",   "EVENT", "NORP", "FAC"};

std::string describe(RecordId id, const EntitySpan& s) {
  return "record " + std::to_string(id) + " span [" + std::to_string(s.start) + "," +
         std::to_string(s.end) + ") '" + s.surface + "'";
}

}  // namespace

std::string_view to_string(EntityType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<EntityType> parse_entity_type(std::string_view text) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == text) return kEntityTypes[i];
  }
  return std::nullopt;
}

std::string scalar_slice(std::string_view text, std::size_t start, std::size_t end) {
  const auto bounds = utf8::scalar_boundaries(text);
  return std::string(text.substr(bounds[start], bounds[end] - bounds[start]));
}

void validate_spans(const NewsRecord& record, const std::vector<EntitySpan>& spans) {
  const auto bounds = utf8::scalar_boundaries(record.caption);
  const std::size_t length = bounds.empty() ? 0 : bounds.size() - 1;
  std::size_t previous_end = 0;
  for (const EntitySpan& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw Error(ErrorCode::SpanMismatch, describe(record.id, s) + ": out of bounds");
    }
    if (s.start < previous_end) {
      throw Error(ErrorCode::SpanMismatch, describe(record.id, s) + ": overlapping or unsorted");
    }
    const std::string_view slice(record.caption.data() + bounds[s.start],
                                 bounds[s.end] - bounds[s.start]);
    if (slice != s.surface) {
      throw Error(ErrorCode::SpanMismatch,
                  describe(record.id, s) + ": caption reads '" + std::string(slice) + "'");
    }
    previous_end = s.end;
  }
}

Annotations::Annotations(const Corpus& corpus, std::vector<AnnotatedCaption> entries) {
  for (AnnotatedCaption& entry : entries) {
    const NewsRecord* record = corpus.find(entry.record_id);
    if (record == nullptr) {
      throw Error(ErrorCode::UnknownRecord, std::to_string(entry.record_id));
    }
    validate_spans(*record, entry.entities);
    if (entry.entities.empty()) continue;
    if (!by_id_.emplace(entry.record_id, std::move(entry.entities)).second) {
      throw Error(ErrorCode::DuplicateId, "annotation for " + std::to_string(entry.record_id));
    }
  }
}

const std::vector<EntitySpan>& Annotations::entities(RecordId id) const {
  static const std::vector<EntitySpan> kNone;
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? kNone : it->second;
}

Annotations read_annotations(std::istream& in, const Corpus& corpus) {
  std::vector<AnnotatedCaption> entries;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    AnnotatedCaption entry;
    entry.record_id = detail::require_u64(j, "id", line);
    const ojson& list = detail::require(j, "entities", line);
    if (!list.is_array()) {
      throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": entities must be a list");
    }
    for (const ojson& e : list) {
      if (!e.is_object()) {
        throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": entity not an object");
      }
      const std::string type_name = detail::require_string(e, "type", line);
      const auto type = parse_entity_type(type_name);
      if (!type) {
        throw Error(ErrorCode::MalformedRecord,
                    detail::line_tag(line) + ": unknown entity type '" + type_name + "'");
      }
      entry.entities.push_back({*type, detail::require_u64(e, "start", line),
                                detail::require_u64(e, "end", line),
                                detail::require_string(e, "text", line)});
    }
    entries.push_back(std::move(entry));
  }
  return Annotations(corpus, std::move(entries));
}

Annotations load_annotations(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_annotations(in, corpus);
}

void write_annotations(const Annotations& annotations, const Corpus& corpus, std::ostream& out) {
  for (const NewsRecord& r : corpus.records()) {
    ojson j;
    j["id"] = r.id;
    j["entities"] = ojson::array();
    for (const EntitySpan& s : annotations.entities(r.id)) {
      ojson e;
      e["type"] = std::string(to_string(s.type));
      e["start"] = s.start;
      e["end"] = s.end;
      e["text"] = s.surface;
      j["entities"].push_back(std::move(e));
    }
    out << detail::dump(j) << '\n';
  }
}

void save_annotations(const Annotations& annotations, const Corpus& corpus,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_annotations(annotations, corpus, out);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace misinfo
