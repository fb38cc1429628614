#include "misinfo/embeddings.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "misinfo/error.hpp"
#include "misinfo/parallel.hpp"
#include "misinfo/seed.hpp"

namespace misinfo {

std::string_view to_string(Modality modality) {
  return modality == Modality::Image ? "image" : "text";
}

Modality parse_modality(std::string_view text) {
  if (text == "image") return Modality::Image;
  if (text == "text") return Modality::Text;
  throw Error(ErrorCode::InvalidArgument, "unknown modality '" + std::string(text) + "'");
}

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'F', 'E', 'B'};
constexpr double kUnitTolerance = 1e-6;

// Normalizes one row in place; throws MalformedVector on non-finite or zero rows.
void normalize_row(std::span<float> v, RecordId id) {
  double sq = 0.0;
  for (const float x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::MalformedVector, "non-finite component for id " + std::to_string(id));
    }
    sq += static_cast<double>(x) * static_cast<double>(x);
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::MalformedVector, "zero-norm vector for id " + std::to_string(id));
  }
  if (std::abs(norm - 1.0) <= kUnitTolerance) return;
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
}

}  // namespace

EmbeddingStore::EmbeddingStore(Modality modality, std::size_t dim, std::vector<RecordId> ids,
                               std::vector<float> matrix)
    : modality_(modality), dim_(dim), ids_(std::move(ids)), matrix_(std::move(matrix)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
  if (matrix_.size() != ids_.size() * dim_) {
    throw Error(ErrorCode::DimMismatch, "matrix holds " + std::to_string(matrix_.size()) +
                                            " floats, expected " +
                                            std::to_string(ids_.size() * dim_));
  }
  rows_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!rows_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::DuplicateId, std::to_string(ids_[i]));
    }
    normalize_row({matrix_.data() + i * dim_, dim_}, ids_[i]);
  }
}

std::optional<std::size_t> EmbeddingStore::find_row(RecordId id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::vector(RecordId id) const {
  const auto r = find_row(id);
  if (!r) throw Error(ErrorCode::UnknownId, std::to_string(id));
  return row(*r);
}

EmbeddingStore read_embeddings(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) {
    throw Error(ErrorCode::TruncatedFile, "while reading magic");
  }
  if (magic != kMagic) throw Error(ErrorCode::BadMagic, "expected MFEB");
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != EmbeddingStore::kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, std::to_string(version));
  }
  const auto modality_byte = detail::get_le<std::uint8_t>(in, "modality");
  if (modality_byte > 1) {
    throw Error(ErrorCode::MalformedRecord, "modality byte " + std::to_string(modality_byte));
  }
  const auto dim = detail::get_le<std::uint32_t>(in, "dim");
  if (expected_dim && *expected_dim != dim) {
    throw Error(ErrorCode::DimMismatch,
                "found " + std::to_string(dim) + ", expected " + std::to_string(*expected_dim));
  }
  const auto count = detail::get_le<std::uint64_t>(in, "count");

  // Guard the allocations below against a corrupt count.
  const std::uint64_t remaining = detail::remaining_bytes(in);
  if (count > remaining / (8 + std::uint64_t{dim} * 4)) {
    throw Error(ErrorCode::TruncatedFile,
                "header declares " + std::to_string(count) + " rows of dim " +
                    std::to_string(dim) + ", file has " + std::to_string(remaining) +
                    " payload bytes");
  }

  std::vector<RecordId> ids(count);
  for (auto& id : ids) id = detail::get_le<std::uint64_t>(in, "ids");
  std::vector<float> matrix(count * dim);
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(matrix.data()),
                 static_cast<std::streamsize>(matrix.size() * sizeof(float)))) {
      throw Error(ErrorCode::TruncatedFile, "while reading vectors");
    }
  } else {
    for (auto& x : matrix) x = std::bit_cast<float>(detail::get_le<std::uint32_t>(in, "vectors"));
  }
  return EmbeddingStore(static_cast<Modality>(modality_byte), dim, std::move(ids),
                        std::move(matrix));
}

EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_embeddings(in, expected_dim);
}

void write_embeddings(const EmbeddingStore& store, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  detail::put_le<std::uint16_t>(out, EmbeddingStore::kFormatVersion);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(store.modality()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim()));
  detail::put_le<std::uint64_t>(out, store.size());
  for (const RecordId id : store.ids()) detail::put_le<std::uint64_t>(out, id);
  const auto m = store.matrix();
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(float)));
  } else {
    for (const float x : m) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_embeddings(store, out);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

EmbeddingStore mock_embed(const Corpus& corpus, std::size_t dim, Modality modality,
                          std::uint64_t seed, unsigned workers) {
  if (dim < 8) throw Error(ErrorCode::InvalidArgument, "mock_embed requires dim >= 8");
  const std::uint64_t tag = modality == Modality::Image ? 0x494D47ULL : 0x545854ULL;
  const auto records = corpus.records();
  std::vector<RecordId> ids(records.size());
  std::vector<float> matrix(records.size() * dim);
  parallel_for(records.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NewsRecord& r = records[i];
      ids[i] = r.id;
      const std::uint64_t key = modality == Modality::Image ? r.id : detail::fnv1a(r.caption);
      SplitMix64 rng(mix_seed(seed, key, tag));
      float* row = matrix.data() + i * dim;
      for (std::size_t d = 0; d < dim; ++d) row[d] = symmetric_unit(rng);
    }
  });
  return EmbeddingStore(modality, dim, std::move(ids), std::move(matrix));
}

}  // namespace misinfo
