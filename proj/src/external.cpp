#include "misinfo/external.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json_util.hpp"
#include "misinfo/error.hpp"

namespace misinfo {

using detail::ojson;

std::string_view to_string(ExternalFormat format) {
  switch (format) {
    case ExternalFormat::NewsCLIPings: return "newsclippings";
    case ExternalFormat::MEIR: return "meir";
    case ExternalFormat::CosmosTest: return "cosmos-test";
  }
  return "newsclippings";
}

ExternalFormat parse_external_format(std::string_view text) {
  if (text == "newsclippings" || text == "nc") return ExternalFormat::NewsCLIPings;
  if (text == "meir") return ExternalFormat::MEIR;
  if (text == "cosmos-test") return ExternalFormat::CosmosTest;
  throw Error(ErrorCode::UnsupportedFormat, "'" + std::string(text) + "'");
}

namespace {

bool require_bool(const ojson& j, const char* name, std::size_t line) {
  const ojson& v = detail::require(j, name, line);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1)) {
    return v.get<long long>() == 1;
  }
  throw Error(ErrorCode::MalformedRecord,
              detail::line_tag(line) + ": field '" + name + "' must be a boolean");
}

}  // namespace

std::vector<GeneratedPair> import_newsclippings(std::istream& in, const Corpus* corpus) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const ojson doc = ojson::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("annotations") ||
      !doc["annotations"].is_array()) {
    throw Error(ErrorCode::MalformedRecord, "NewsCLIPings file must hold an 'annotations' list");
  }
  std::vector<GeneratedPair> pairs;
  pairs.reserve(doc["annotations"].size());
  std::size_t entry = 0;
  std::size_t unresolved = 0;
  for (const ojson& a : doc["annotations"]) {
    ++entry;
    if (!a.is_object()) {
      throw Error(ErrorCode::MalformedRecord, "annotation " + std::to_string(entry));
    }
    GeneratedPair p;
    const RecordId caption_id = detail::require_u64(a, "id", entry);
    p.image_id = detail::require_u64(a, "image_id", entry);
    p.label = require_bool(a, "falsified", entry) ? Label::OOC : Label::Truthful;
    if (corpus != nullptr) {
      const NewsRecord* caption_record = corpus->find(caption_id);
      if (caption_record == nullptr) {
        throw Error(ErrorCode::UnknownRecord, "caption id " + std::to_string(caption_id));
      }
      p.caption = caption_record->caption;
      if (const NewsRecord* image_record = corpus->find(p.image_id)) {
        p.image_ref = image_record->image_ref;
      }
    } else {
      ++unresolved;
    }
    p.provenance.strategy = "nc";
    p.provenance.source_id = caption_id;
    if (p.label == Label::OOC) p.provenance.donor_id = p.image_id;
    pairs.push_back(std::move(p));
  }
  if (unresolved > 0) {
    spdlog::warn("newsclippings: {} captions left unresolved (no corpus given)", unresolved);
  }
  return pairs;
}

std::vector<GeneratedPair> import_meir(std::istream& in) {
  std::vector<GeneratedPair> pairs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    GeneratedPair p;
    p.provenance.strategy = "meir";
    p.provenance.source_id = detail::require_u64(j, "id", line);
    p.image_id = detail::require_u64(j, "image_id", line);
    p.caption = detail::require_string(j, "caption", line);
    if (const auto it = j.find("image_ref"); it != j.end() && it->is_string()) {
      p.image_ref = it->get<std::string>();
    }
    p.label = require_bool(j, "manipulated", line) ? Label::NEI : Label::Truthful;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<EvalItem> import_cosmos_test(std::istream& in) {
  std::vector<EvalItem> items;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    EvalItem item;
    item.id = items.size();
    item.image_id = detail::require_string(j, "img_local_path", line);
    item.caption = detail::require_string(j, "caption1", line);
    const ojson& label = detail::require(j, "context_label", line);
    if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
      throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": context_label must be 0 or 1");
    }
    item.label = label.get<long long>() == 1 ? BinaryLabel::Falsified : BinaryLabel::Truthful;
    items.push_back(std::move(item));
  }
  return items;
}

ImportResult import_external(ExternalFormat format, const std::filesystem::path& path,
                             const Corpus* corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  switch (format) {
    case ExternalFormat::NewsCLIPings: return import_newsclippings(in, corpus);
    case ExternalFormat::MEIR: return import_meir(in);
    case ExternalFormat::CosmosTest: return import_cosmos_test(in);
  }
  throw Error(ErrorCode::UnsupportedFormat, "unknown format");
}

}  // namespace misinfo
