#pragma once

#include <cstddef>
#include <cstdint>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"

namespace misinfo {

struct MockCorpusOptions {
  std::size_t records = 1000;
  std::size_t topics = 10;
  std::uint64_t seed = 0;
  /// Fraction of records that reuse an earlier caption from the same topic.
  double duplicate_rate = 0.01;
  /// Fraction of records assigned to the validation split.
  double val_fraction = 0.0;
};

struct MockCorpus {
  Corpus corpus;
  Annotations annotations;
};

/// Synthetic news corpus with templated captions and exact entity spans.
/// Some captions carry no entities; some names are non-ASCII so scalar and
/// byte offsets differ. Output is a pure function of the options.
MockCorpus make_mock_corpus(const MockCorpusOptions& options);

}  // namespace misinfo
