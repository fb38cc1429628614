#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "misinfo/corpus.hpp"
#include "misinfo/embeddings.hpp"

namespace misinfo {

/// Partition of a corpus by topic; every bucket is sorted by ascending id.
class TopicIndex {
 public:
  TopicIndex() = default;
  explicit TopicIndex(const Corpus& corpus);

  std::size_t topic_count() const noexcept { return topics_.size(); }
  /// Topic names in lexicographic order.
  const std::vector<std::string>& topics() const noexcept { return topics_; }
  std::span<const RecordId> bucket(std::string_view topic) const;
  std::span<const RecordId> bucket_at(std::size_t topic_number) const {
    return buckets_[topic_number];
  }
  /// Throws UnknownId.
  std::size_t topic_number(RecordId id) const;
  std::span<const RecordId> bucket_of(RecordId id) const { return buckets_[topic_number(id)]; }

 private:
  std::vector<std::string> topics_;
  std::vector<std::vector<RecordId>> buckets_;
  std::unordered_map<RecordId, std::uint32_t> topic_of_;
};

inline TopicIndex build_topic_index(const Corpus& corpus) { return TopicIndex(corpus); }

/// Dot product of two unit vectors, accumulated in double and clamped to
/// [-1, 1]. Throws DimMismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Extra admissibility constraints for a query. The query's own id is always
/// excluded, whether or not it is listed here.
struct CandidateFilter {
  std::unordered_set<RecordId> exclude_ids;
  /// Optional acceptance test over candidate ids.
  std::function<bool(RecordId)> predicate;
  /// Reject candidates whose caption is byte-identical to the query's.
  /// Always on when either space is text.
  bool exclude_identical_captions = false;
};

struct ScoredId {
  RecordId id = 0;
  double score = 0.0;
  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

class TopKCache;

/// Exact in-topic nearest-neighbour search. Candidates are ranked by cosine
/// descending with ties broken by ascending id.
///
/// The index keeps references to its inputs; they must outlive it.
class SimilarityIndex {
 public:
  /// Either store may be null when that space is never queried. Every
  /// indexed record must have a row in each provided store (UnknownId).
  SimilarityIndex(const Corpus& corpus, const TopicIndex& topics,
                  const EmbeddingStore* image_store, const EmbeddingStore* text_store);

  /// rank 0 is the best admissible candidate. Throws NoCandidate when fewer
  /// than rank+1 candidates survive the filter, UnknownId for a bad query.
  RecordId nearest_candidate(RecordId query, Modality query_space, Modality candidate_space,
                             const CandidateFilter& filter = {}, std::size_t rank = 0) const;

  /// Up to k best candidates; shorter when the bucket runs out.
  std::vector<RecordId> top_k(RecordId query, Modality query_space, Modality candidate_space,
                              const CandidateFilter& filter, std::size_t k) const;
  std::vector<ScoredId> scored_top_k(RecordId query, Modality query_space,
                                     Modality candidate_space, const CandidateFilter& filter,
                                     std::size_t k) const;

  /// Queries in the cache's (query, candidate) spaces read candidate lists
  /// from it, falling back to a scan when the cached prefix is too short.
  /// One cache per space pair; a later attach replaces an earlier one.
  void attach_cache(const TopKCache& cache) noexcept;

  const Corpus& corpus() const noexcept { return *corpus_; }
  const TopicIndex& topic_index() const noexcept { return *topics_; }
  bool has_store(Modality m) const noexcept {
    return (m == Modality::Image ? image_ : text_) != nullptr;
  }
  /// Throws MissingInput when the store was not provided.
  const EmbeddingStore& store(Modality m) const;

 private:
  struct Entry {
    RecordId id;
    std::uint32_t position;  // in corpus order
    std::uint32_t image_row;
    std::uint32_t text_row;
  };

  bool admissible(const Entry& candidate, const Entry& query, const CandidateFilter& filter,
                  bool exclude_identical) const;
  const Entry& entry_of(RecordId id) const;
  const float* row_ptr(const Entry& e, Modality m) const;
  std::vector<ScoredId> scan(const Entry& query, Modality qs, Modality cs,
                             const CandidateFilter& filter, std::size_t k) const;

  const Corpus* corpus_;
  const TopicIndex* topics_;
  const EmbeddingStore* image_;
  const EmbeddingStore* text_;
  std::array<const TopKCache*, 4> caches_{};
  std::vector<std::vector<Entry>> buckets_;
  std::unordered_map<RecordId, std::pair<std::uint32_t, std::uint32_t>> where_;
  std::vector<std::uint64_t> caption_hash_;
};

/// Persisted per-query candidate lists computed with the default filter.
/// A pure optimization: results with and without the cache are identical.
class TopKCache {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  TopKCache() = default;
  TopKCache(Modality query_space, Modality candidate_space, std::size_t k,
            std::vector<std::pair<RecordId, std::vector<RecordId>>> lists);

  static TopKCache build(const SimilarityIndex& index, Modality query_space,
                         Modality candidate_space, std::size_t k, unsigned workers = 1);

  Modality query_space() const noexcept { return query_space_; }
  Modality candidate_space() const noexcept { return candidate_space_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return lists_.size(); }
  const std::vector<std::pair<RecordId, std::vector<RecordId>>>& lists() const noexcept {
    return lists_;
  }
  const std::vector<RecordId>* find(RecordId query) const;

  friend bool operator==(const TopKCache& a, const TopKCache& b) {
    return a.query_space_ == b.query_space_ && a.candidate_space_ == b.candidate_space_ &&
           a.k_ == b.k_ && a.lists_ == b.lists_;
  }

 private:
  Modality query_space_ = Modality::Image;
  Modality candidate_space_ = Modality::Image;
  std::size_t k_ = 0;
  std::vector<std::pair<RecordId, std::vector<RecordId>>> lists_;
  std::unordered_map<RecordId, std::size_t> by_query_;
};

TopKCache read_topk_cache(std::istream& in);
TopKCache load_topk_cache(const std::filesystem::path& path);
void write_topk_cache(const TopKCache& cache, std::ostream& out);
void save_topk_cache(const TopKCache& cache, const std::filesystem::path& path);

}  // namespace misinfo
