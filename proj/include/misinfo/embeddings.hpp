#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "misinfo/corpus.hpp"

namespace misinfo {

enum class Modality : std::uint8_t { Image = 0, Text = 1 };

std::string_view to_string(Modality modality);
Modality parse_modality(std::string_view text);

/// Dense row-major table of unit vectors keyed by record id.
///
/// Construction L2-normalizes every row. Rows already within 1e-6 of unit
/// length are kept bit-for-bit so that loading a saved store and saving it
/// again reproduces the file exactly.
class EmbeddingStore {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  EmbeddingStore() = default;
  /// Throws DuplicateId, DimMismatch (matrix size), or MalformedVector
  /// (non-finite component or zero norm).
  EmbeddingStore(Modality modality, std::size_t dim, std::vector<RecordId> ids,
                 std::vector<float> matrix);

  Modality modality() const noexcept { return modality_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const RecordId> ids() const noexcept { return ids_; }
  std::span<const float> matrix() const noexcept { return matrix_; }

  std::span<const float> row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }
  std::optional<std::size_t> find_row(RecordId id) const;
  bool contains(RecordId id) const { return rows_.contains(id); }
  /// Throws UnknownId.
  std::span<const float> vector(RecordId id) const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.modality_ == b.modality_ && a.dim_ == b.dim_ && a.ids_ == b.ids_ &&
           a.matrix_ == b.matrix_;
  }

 private:
  Modality modality_ = Modality::Image;
  std::size_t dim_ = 0;
  std::vector<RecordId> ids_;
  std::vector<float> matrix_;
  std::unordered_map<RecordId, std::size_t> rows_;
};

EmbeddingStore read_embeddings(std::istream& in,
                               std::optional<std::size_t> expected_dim = std::nullopt);
EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt);

void write_embeddings(const EmbeddingStore& store, std::ostream& out);
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

/// Deterministic stand-in for a real encoder. Image rows depend on
/// (seed, record id); text rows depend on (seed, caption bytes) so duplicate
/// captions share a vector. Requires dim >= 8.
EmbeddingStore mock_embed(const Corpus& corpus, std::size_t dim, Modality modality,
                          std::uint64_t seed, unsigned workers = 1);

}  // namespace misinfo
