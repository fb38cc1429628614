#include "misinfo/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json_util.hpp"
#include "misinfo/utf8.hpp"

namespace misinfo {

using detail::ojson;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error(ErrorCode::InvalidArgument, "unknown split '" + std::string(text) + "'");
}

namespace {

void validate(const NewsRecord& r, const std::string& where) {
  if (detail::is_blank(r.caption)) {
    throw Error(ErrorCode::MalformedRecord, where + ": empty caption");
  }
  if (r.topic.empty()) {
    throw Error(ErrorCode::MalformedRecord, where + ": empty topic");
  }
  if (!utf8::is_valid(r.caption)) {
    throw Error(ErrorCode::MalformedRecord, where + ": caption is not valid UTF-8");
  }
}

}  // namespace

Corpus::Corpus(std::vector<NewsRecord> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const NewsRecord& r = records_[i];
    validate(r, "record " + std::to_string(r.id));
    if (!index_.emplace(r.id, i).second) {
      throw Error(ErrorCode::DuplicateId, std::to_string(r.id));
    }
  }
}

std::size_t Corpus::position(RecordId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownId, std::to_string(id));
  return it->second;
}

const NewsRecord* Corpus::find(RecordId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

Corpus Corpus::filter_split(Split split) const {
  std::vector<NewsRecord> kept;
  for (const NewsRecord& r : records_) {
    if (r.split == split) kept.push_back(r);
  }
  return Corpus(std::move(kept));
}

Corpus read_corpus(std::istream& in) {
  std::vector<NewsRecord> records;
  std::unordered_map<RecordId, std::size_t> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    NewsRecord r;
    r.id = detail::require_u64(j, "id", line);
    r.image_ref = detail::require_string(j, "image_ref", line);
    r.caption = detail::require_string(j, "caption", line);
    r.topic = detail::require_string(j, "topic", line);
    r.source = detail::require_string(j, "source", line);
    try {
      r.split = parse_split(detail::require_string(j, "split", line));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
      throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": " + e.what());
    }
    validate(r, detail::line_tag(line));
    if (const auto [it, fresh] = seen.emplace(r.id, line); !fresh) {
      throw Error(ErrorCode::DuplicateId, std::to_string(r.id) + " (" +
                                              detail::line_tag(line) + ", first at " +
                                              detail::line_tag(it->second) + ")");
    }
    records.push_back(std::move(r));
  }
  return Corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const NewsRecord& r : corpus.records()) {
    ojson j;
    j["id"] = r.id;
    j["image_ref"] = r.image_ref;
    j["caption"] = r.caption;
    j["topic"] = r.topic;
    j["source"] = r.source;
    j["split"] = std::string(to_string(r.split));
    out << detail::dump(j) << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_corpus(corpus, out);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace misinfo
