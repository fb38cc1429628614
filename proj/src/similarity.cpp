#include "misinfo/similarity.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>

#include "binary_io.hpp"
#include "misinfo/error.hpp"
#include "misinfo/parallel.hpp"

namespace misinfo {

TopicIndex::TopicIndex(const Corpus& corpus) {
  std::map<std::string, std::vector<RecordId>> grouped;
  for (const NewsRecord& r : corpus.records()) grouped[r.topic].push_back(r.id);
  topics_.reserve(grouped.size());
  buckets_.reserve(grouped.size());
  for (auto& [topic, ids] : grouped) {
    std::sort(ids.begin(), ids.end());
    const auto number = static_cast<std::uint32_t>(topics_.size());
    for (const RecordId id : ids) topic_of_.emplace(id, number);
    topics_.push_back(topic);
    buckets_.push_back(std::move(ids));
  }
}

std::span<const RecordId> TopicIndex::bucket(std::string_view topic) const {
  const auto it = std::lower_bound(topics_.begin(), topics_.end(), topic);
  if (it == topics_.end() || *it != topic) return {};
  return buckets_[static_cast<std::size_t>(it - topics_.begin())];
}

std::size_t TopicIndex::topic_number(RecordId id) const {
  const auto it = topic_of_.find(id);
  if (it == topic_of_.end()) throw Error(ErrorCode::UnknownId, std::to_string(id));
  return it->second;
}

namespace {

// Four fixed lanes, combined in a fixed order: the result depends only on
// the inputs, never on the caller.
double dot(const float* a, const float* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    s1 += static_cast<double>(a[i + 1]) * static_cast<double>(b[i + 1]);
    s2 += static_cast<double>(a[i + 2]) * static_cast<double>(b[i + 2]);
    s3 += static_cast<double>(a[i + 3]) * static_cast<double>(b[i + 3]);
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::clamp((s0 + s1) + (s2 + s3), -1.0, 1.0);
}

std::size_t cache_slot(Modality qs, Modality cs) {
  return 2 * static_cast<std::size_t>(qs) + static_cast<std::size_t>(cs);
}

bool ranks_before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  return dot(u.data(), v.data(), u.size());
}

SimilarityIndex::SimilarityIndex(const Corpus& corpus, const TopicIndex& topics,
                                 const EmbeddingStore* image_store,
                                 const EmbeddingStore* text_store)
    : corpus_(&corpus), topics_(&topics), image_(image_store), text_(text_store) {
  const auto row_of = [](const EmbeddingStore* store, RecordId id) -> std::uint32_t {
    if (store == nullptr) return 0;
    const auto r = store->find_row(id);
    if (!r) {
      throw Error(ErrorCode::UnknownId, "no " + std::string(to_string(store->modality())) +
                                            " embedding for record " + std::to_string(id));
    }
    return static_cast<std::uint32_t>(*r);
  };
  caption_hash_.reserve(corpus.size());
  for (const NewsRecord& r : corpus.records()) caption_hash_.push_back(detail::fnv1a(r.caption));

  buckets_.resize(topics.topic_count());
  for (std::size_t t = 0; t < topics.topic_count(); ++t) {
    const auto ids = topics.bucket_at(t);
    auto& bucket = buckets_[t];
    bucket.reserve(ids.size());
    for (const RecordId id : ids) {
      where_.emplace(id, std::pair{static_cast<std::uint32_t>(t),
                                   static_cast<std::uint32_t>(bucket.size())});
      bucket.push_back({id, static_cast<std::uint32_t>(corpus.position(id)), row_of(image_, id),
                        row_of(text_, id)});
    }
  }
}

void SimilarityIndex::attach_cache(const TopKCache& cache) noexcept {
  caches_[cache_slot(cache.query_space(), cache.candidate_space())] = &cache;
}

const EmbeddingStore& SimilarityIndex::store(Modality m) const {
  const EmbeddingStore* s = m == Modality::Image ? image_ : text_;
  if (s == nullptr) {
    throw Error(ErrorCode::MissingInput, std::string(to_string(m)) + " embeddings");
  }
  return *s;
}

const SimilarityIndex::Entry& SimilarityIndex::entry_of(RecordId id) const {
  const auto it = where_.find(id);
  if (it == where_.end()) throw Error(ErrorCode::UnknownId, std::to_string(id));
  return buckets_[it->second.first][it->second.second];
}

const float* SimilarityIndex::row_ptr(const Entry& e, Modality m) const {
  const EmbeddingStore& s = store(m);
  return s.matrix().data() + std::size_t{m == Modality::Image ? e.image_row : e.text_row} * s.dim();
}

bool SimilarityIndex::admissible(const Entry& candidate, const Entry& query,
                                 const CandidateFilter& filter, bool exclude_identical) const {
  if (candidate.id == query.id) return false;
  if (!filter.exclude_ids.empty() && filter.exclude_ids.contains(candidate.id)) return false;
  if (exclude_identical && caption_hash_[candidate.position] == caption_hash_[query.position] &&
      (*corpus_)[candidate.position].caption == (*corpus_)[query.position].caption) {
    return false;
  }
  if (filter.predicate && !filter.predicate(candidate.id)) return false;
  return true;
}

std::vector<ScoredId> SimilarityIndex::scan(const Entry& query, Modality qs, Modality cs,
                                            const CandidateFilter& filter, std::size_t k) const {
  const EmbeddingStore& qstore = store(qs);
  const EmbeddingStore& cstore = store(cs);
  if (qstore.dim() != cstore.dim()) {
    throw Error(ErrorCode::DimMismatch, std::to_string(qstore.dim()) + " vs " +
                                            std::to_string(cstore.dim()));
  }
  const bool exclude_identical =
      filter.exclude_identical_captions || qs == Modality::Text || cs == Modality::Text;
  const float* q = row_ptr(query, qs);
  const std::size_t dim = qstore.dim();
  const auto& bucket = buckets_[where_.at(query.id).first];

  if (k == 1) {
    ScoredId best{};
    bool found = false;
    for (const Entry& c : bucket) {
      if (!admissible(c, query, filter, exclude_identical)) continue;
      const ScoredId s{c.id, dot(q, row_ptr(c, cs), dim)};
      if (!found || ranks_before(s, best)) {
        best = s;
        found = true;
      }
    }
    return found ? std::vector<ScoredId>{best} : std::vector<ScoredId>{};
  }

  std::vector<ScoredId> scored;
  scored.reserve(bucket.size());
  for (const Entry& c : bucket) {
    if (!admissible(c, query, filter, exclude_identical)) continue;
    scored.push_back({c.id, dot(q, row_ptr(c, cs), dim)});
  }
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

std::vector<ScoredId> SimilarityIndex::scored_top_k(RecordId query, Modality query_space,
                                                    Modality candidate_space,
                                                    const CandidateFilter& filter,
                                                    std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top_k requires k >= 1");
  const Entry& q = entry_of(query);

  const TopKCache* cache = caches_[cache_slot(query_space, candidate_space)];
  if (cache != nullptr) {
    if (const auto* cached = cache->find(query)) {
      const bool exclude_identical = filter.exclude_identical_captions ||
                                     query_space == Modality::Text ||
                                     candidate_space == Modality::Text;
      const float* qv = row_ptr(q, query_space);
      const std::size_t dim = store(query_space).dim();
      std::vector<ScoredId> out;
      for (const RecordId id : *cached) {
        const Entry& c = entry_of(id);
        if (!admissible(c, q, filter, exclude_identical)) continue;
        out.push_back({id, dot(qv, row_ptr(c, candidate_space), dim)});
        if (out.size() == k) return out;
      }
      // A list shorter than the cache depth already covers the whole bucket.
      if (cached->size() < cache->k()) return out;
    }
  }
  return scan(q, query_space, candidate_space, filter, k);
}

std::vector<RecordId> SimilarityIndex::top_k(RecordId query, Modality query_space,
                                             Modality candidate_space,
                                             const CandidateFilter& filter, std::size_t k) const {
  std::vector<RecordId> ids;
  for (const ScoredId& s : scored_top_k(query, query_space, candidate_space, filter, k)) {
    ids.push_back(s.id);
  }
  return ids;
}

RecordId SimilarityIndex::nearest_candidate(RecordId query, Modality query_space,
                                            Modality candidate_space,
                                            const CandidateFilter& filter,
                                            std::size_t rank) const {
  const auto ranked = scored_top_k(query, query_space, candidate_space, filter, rank + 1);
  if (ranked.size() <= rank) {
    throw Error(ErrorCode::NoCandidate, "query " + std::to_string(query) + " rank " +
                                            std::to_string(rank) + ": only " +
                                            std::to_string(ranked.size()) + " admissible");
  }
  return ranked[rank].id;
}

// ---------------------------------------------------------------------------
// Top-k cache

namespace {
constexpr std::array<char, 4> kCacheMagic = {'M', 'F', 'T', 'K'};
}

TopKCache::TopKCache(Modality query_space, Modality candidate_space, std::size_t k,
                     std::vector<std::pair<RecordId, std::vector<RecordId>>> lists)
    : query_space_(query_space), candidate_space_(candidate_space), k_(k), lists_(std::move(lists)) {
  if (k_ == 0) throw Error(ErrorCode::InvalidArgument, "cache depth must be >= 1");
  for (std::size_t i = 0; i < lists_.size(); ++i) {
    if (lists_[i].second.size() > k_) {
      throw Error(ErrorCode::MalformedRecord, "cache list longer than k for query " +
                                                  std::to_string(lists_[i].first));
    }
    if (!by_query_.emplace(lists_[i].first, i).second) {
      throw Error(ErrorCode::DuplicateId, std::to_string(lists_[i].first));
    }
  }
}

TopKCache TopKCache::build(const SimilarityIndex& index, Modality query_space,
                           Modality candidate_space, std::size_t k, unsigned workers) {
  const auto records = index.corpus().records();
  std::vector<std::pair<RecordId, std::vector<RecordId>>> lists(records.size());
  parallel_for(records.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      lists[i] = {records[i].id, index.top_k(records[i].id, query_space, candidate_space, {}, k)};
    }
  });
  return TopKCache(query_space, candidate_space, k, std::move(lists));
}

const std::vector<RecordId>* TopKCache::find(RecordId query) const {
  const auto it = by_query_.find(query);
  return it == by_query_.end() ? nullptr : &lists_[it->second].second;
}

TopKCache read_topk_cache(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw Error(ErrorCode::TruncatedFile, "magic");
  if (magic != kCacheMagic) throw Error(ErrorCode::BadMagic, "expected MFTK");
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != TopKCache::kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, std::to_string(version));
  }
  const auto qs = detail::get_le<std::uint8_t>(in, "query space");
  const auto cs = detail::get_le<std::uint8_t>(in, "candidate space");
  if (qs > 1 || cs > 1) throw Error(ErrorCode::MalformedRecord, "bad space byte");
  const auto k = detail::get_le<std::uint32_t>(in, "k");
  const auto count = detail::get_le<std::uint64_t>(in, "count");
  if (count > detail::remaining_bytes(in) / 12) {
    throw Error(ErrorCode::TruncatedFile, "declared query count exceeds file size");
  }
  std::vector<std::pair<RecordId, std::vector<RecordId>>> lists(count);
  for (auto& [query, ids] : lists) {
    query = detail::get_le<std::uint64_t>(in, "query id");
    const auto n = detail::get_le<std::uint32_t>(in, "list length");
    if (n > k) throw Error(ErrorCode::MalformedRecord, "list longer than k");
    ids.resize(n);
    for (auto& id : ids) id = detail::get_le<std::uint64_t>(in, "candidate id");
  }
  return TopKCache(static_cast<Modality>(qs), static_cast<Modality>(cs), k, std::move(lists));
}

TopKCache load_topk_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_topk_cache(in);
}

void write_topk_cache(const TopKCache& cache, std::ostream& out) {
  out.write(kCacheMagic.data(), kCacheMagic.size());
  detail::put_le<std::uint16_t>(out, TopKCache::kFormatVersion);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(cache.query_space()));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(cache.candidate_space()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cache.k()));
  detail::put_le<std::uint64_t>(out, cache.size());
  for (const auto& [query, ids] : cache.lists()) {
    detail::put_le<std::uint64_t>(out, query);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
    for (const RecordId id : ids) detail::put_le<std::uint64_t>(out, id);
  }
}

void save_topk_cache(const TopKCache& cache, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_topk_cache(cache, out);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace misinfo
