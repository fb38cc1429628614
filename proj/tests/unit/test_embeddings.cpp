#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "misinfo/embeddings.hpp"
#include "misinfo/error.hpp"
#include "misinfo/mock.hpp"
#include "oracles.hpp"

using namespace misinfo;

namespace {

/// Hand-assembled MFEB image, independent of the writer.
std::string mfeb(std::uint8_t modality, std::uint32_t dim, const std::vector<std::uint64_t>& ids,
                 const std::vector<float>& values, std::uint16_t version = 1) {
  std::string s = "MFEB";
  const auto put = [&](auto v) {
    for (std::size_t i = 0; i < sizeof(v); ++i) {
      s.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
  };
  put(version);
  put(modality);
  put(dim);
  put(static_cast<std::uint64_t>(ids.size()));
  for (auto id : ids) put(id);
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put(bits);
  }
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Embeddings, NormalizesAtLoad) {
  std::istringstream in(mfeb(0, 2, {5}, {3.0f, 4.0f}));
  const EmbeddingStore s = read_embeddings(in);
  EXPECT_FLOAT_EQ(s.vector(5)[0], 0.6f);
  EXPECT_FLOAT_EQ(s.vector(5)[1], 0.8f);
  EXPECT_EQ(s.modality(), Modality::Image);
}

TEST(Embeddings, ExpectedDimensionChecked) {
  std::vector<float> v(768, 0.5f);
  std::istringstream ok(mfeb(1, 768, {1}, v));
  EXPECT_EQ(read_embeddings(ok, 768).dim(), 768u);
  std::vector<float> w(512, 0.5f);
  std::istringstream bad(mfeb(1, 512, {1}, w));
  try {
    read_embeddings(bad, 768);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
    EXPECT_NE(std::string(e.what()).find("512"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("768"), std::string::npos);
  }
}

TEST(Embeddings, HeaderAndBodyErrors) {
  std::string bad_magic = mfeb(0, 2, {1}, {1, 0});
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  EXPECT_EQ(code_of([&] { read_embeddings(a); }), ErrorCode::BadMagic);
  std::istringstream b(mfeb(0, 2, {1}, {1, 0}, 2));
  EXPECT_EQ(code_of([&] { read_embeddings(b); }), ErrorCode::UnsupportedVersion);
  std::string full = mfeb(0, 2, {1, 2}, {1, 0, 0, 1});
  std::istringstream c(full.substr(0, full.size() - 3));
  EXPECT_EQ(code_of([&] { read_embeddings(c); }), ErrorCode::TruncatedFile);
  std::istringstream d(full.substr(0, 10));
  EXPECT_EQ(code_of([&] { read_embeddings(d); }), ErrorCode::TruncatedFile);
  std::istringstream e(mfeb(0, 2, {1}, {NAN, 1}));
  EXPECT_EQ(code_of([&] { read_embeddings(e); }), ErrorCode::MalformedVector);
  std::istringstream f(mfeb(0, 2, {1}, {0, 0}));
  EXPECT_EQ(code_of([&] { read_embeddings(f); }), ErrorCode::MalformedVector);
  std::istringstream g(mfeb(0, 2, {4, 4}, {1, 0, 0, 1}));
  EXPECT_EQ(code_of([&] { read_embeddings(g); }), ErrorCode::DuplicateId);
}

TEST(Embeddings, HugeCountDoesNotAllocate) {
  std::string s = mfeb(0, 1u << 30, {}, {});
  // Patch count to 2^60 without providing data.
  for (int i = 0; i < 8; ++i) s[11 + i] = i == 7 ? 0x10 : 0;
  std::istringstream in(s);
  EXPECT_EQ(code_of([&] { read_embeddings(in); }), ErrorCode::TruncatedFile);
}

TEST(Embeddings, WriterMatchesHandAssembledBytes) {
  const EmbeddingStore s(Modality::Text, 2, {9, 3}, {1.0f, 0.0f, 0.0f, 1.0f});
  std::ostringstream out;
  write_embeddings(s, out);
  EXPECT_EQ(out.str(), mfeb(1, 2, {9, 3}, {1.0f, 0.0f, 0.0f, 1.0f}));
}

TEST(Embeddings, SaveLoadIsByteIdenticalAndUnitNorm) {
  oracle::TempDir dir;
  oracle::Gen gen(11);
  std::vector<RecordId> ids;
  std::vector<float> m;
  for (RecordId id = 0; id < 200; ++id) {
    ids.push_back(id * 7 + 1);
    for (int k = 0; k < 33; ++k) m.push_back(gen.real(-3.0f, 3.0f));
  }
  // Unnormalized raw file: loading normalizes, then save/load/save is stable.
  oracle::write_bytes(dir / "raw.mfeb", mfeb(0, 33, ids, m));
  const EmbeddingStore a = load_embeddings(dir / "raw.mfeb");
  for (std::size_t i = 0; i < a.size(); ++i) {
    double n = 0;
    for (float f : a.row(i)) n += double(f) * f;
    ASSERT_NEAR(std::sqrt(n), 1.0, 1e-4);
  }
  save_embeddings(a, dir / "a.mfeb");
  const EmbeddingStore b = load_embeddings(dir / "a.mfeb");
  EXPECT_EQ(a, b);
  save_embeddings(b, dir / "b.mfeb");
  EXPECT_EQ(oracle::read_bytes(dir / "a.mfeb"), oracle::read_bytes(dir / "b.mfeb"));
}

TEST(MockEmbed, DeterministicAcrossRunsAndWorkers) {
  const MockCorpus m = make_mock_corpus({.records = 1500, .topics = 5, .seed = 2});
  for (Modality mod : {Modality::Image, Modality::Text}) {
    const EmbeddingStore one = mock_embed(m.corpus, 32, mod, 5, 1);
    EXPECT_EQ(one, mock_embed(m.corpus, 32, mod, 5, 1));
    EXPECT_EQ(one, mock_embed(m.corpus, 32, mod, 5, 7));
    EXPECT_FALSE(one == mock_embed(m.corpus, 32, mod, 6, 1));
  }
  EXPECT_THROW(mock_embed(m.corpus, 4, Modality::Image, 1), Error);
}

TEST(MockEmbed, TextVectorsFollowCaptions) {
  const MockCorpus m = make_mock_corpus({.records = 3000, .topics = 6, .seed = 4, .duplicate_rate = 0.05});
  const EmbeddingStore text = mock_embed(m.corpus, 16, Modality::Text, 1);
  std::map<std::string, RecordId> first;
  std::size_t dups = 0;
  for (const NewsRecord& r : m.corpus.records()) {
    auto [it, fresh] = first.emplace(r.caption, r.id);
    if (fresh) continue;
    ++dups;
    const auto a = text.vector(it->second), b = text.vector(r.id);
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  EXPECT_GT(dups, 0u);
}

TEST(MockEmbed, NoCollisionsAcrossTenThousandImageRows) {
  const MockCorpus m = make_mock_corpus({.records = 10000, .topics = 20, .seed = 8});
  const EmbeddingStore s = mock_embed(m.corpus, 64, Modality::Image, 3, 4);
  // Pairwise scan via ordering: identical rows would be adjacent once sorted.
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto less = [&](std::size_t a, std::size_t b) {
    const auto x = s.row(a), y = s.row(b);
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t identical = 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto x = s.row(order[i - 1]), y = s.row(order[i]);
    identical += std::equal(x.begin(), x.end(), y.begin());
  }
  EXPECT_EQ(identical, 0u);
}
