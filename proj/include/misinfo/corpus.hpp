#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace misinfo {

using RecordId = std::uint64_t;

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// One truthful image-caption pair.
struct NewsRecord {
  RecordId id = 0;
  std::string image_ref;
  std::string caption;
  std::string topic;
  std::string source;
  Split split = Split::Train;

  friend bool operator==(const NewsRecord&, const NewsRecord&) = default;
};

/// Records in file order with an id lookup. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  /// Validates every record; throws DuplicateId or MalformedRecord.
  explicit Corpus(std::vector<NewsRecord> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::span<const NewsRecord> records() const noexcept { return records_; }
  const NewsRecord& operator[](std::size_t i) const { return records_[i]; }

  bool contains(RecordId id) const { return index_.contains(id); }
  /// Position of `id` in file order; throws UnknownId.
  std::size_t position(RecordId id) const;
  const NewsRecord& at(RecordId id) const { return records_[position(id)]; }
  const NewsRecord* find(RecordId id) const;

  Corpus filter_split(Split split) const;

 private:
  std::vector<NewsRecord> records_;
  std::unordered_map<RecordId, std::size_t> index_;
};

Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Canonical one-object-per-line form; read_corpus(write_corpus(c)) == c and
/// re-writing a canonical file reproduces it byte for byte.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace misinfo
