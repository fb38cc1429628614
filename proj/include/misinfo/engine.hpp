#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "misinfo/annotations.hpp"
#include "misinfo/corpus.hpp"
#include "misinfo/embeddings.hpp"
#include "misinfo/similarity.hpp"

namespace misinfo {

enum class StrategyKind : std::uint8_t {
  RS_C,
  RSt_C,
  RSt_I,
  RSt_alt,
  CSt_C,
  CSt_I,
  CSt_alt,
  R_NESt,
  CLIP_NESt_C,
  CLIP_NESt_I,
  CLIP_NESt_alt,
};

inline constexpr std::array<StrategyKind, 11> kStrategyKinds = {
    StrategyKind::RS_C,   StrategyKind::RSt_C,       StrategyKind::RSt_I,
    StrategyKind::RSt_alt, StrategyKind::CSt_C,      StrategyKind::CSt_I,
    StrategyKind::CSt_alt, StrategyKind::R_NESt,     StrategyKind::CLIP_NESt_C,
    StrategyKind::CLIP_NESt_I, StrategyKind::CLIP_NESt_alt};

/// Canonical lowercase name used on the command line and in provenance,
/// e.g. "clip-nest-alt".
std::string_view to_string(StrategyKind kind);
/// Mixed-case name, e.g. "CLIP-NESt-alt".
std::string_view display_name(StrategyKind kind);
/// Either spelling, case-insensitive.
std::optional<StrategyKind> parse_strategy_kind(std::string_view text);

bool produces_nei(StrategyKind kind);
bool needs_embeddings(StrategyKind kind);
bool needs_annotations(StrategyKind kind);
/// Tag mixed into every per-record seed: 1-based position in kStrategyKinds.
std::uint64_t kind_tag(StrategyKind kind);

struct Strategy {
  StrategyKind kind = StrategyKind::RS_C;
  std::uint64_t seed = 0;
  /// Highest candidate rank tried after inadmissible CLIP-NESt pairs.
  std::uint32_t retry_budget = 10;
};

/// Seed for one source record: mix(strategy seed, record id, kind tag).
std::uint64_t record_seed(const Strategy& strategy, RecordId id);

enum class Label : std::uint8_t { Truthful, OOC, NEI };
std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct Provenance {
  std::string strategy;
  RecordId source_id = 0;
  std::optional<RecordId> donor_id;
  std::uint64_t seed = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// One training example. image_id is the id of the record whose image is
/// shown; image_ref is that record's opaque image reference.
struct GeneratedPair {
  RecordId image_id = 0;
  std::string image_ref;
  std::string caption;
  Label label = Label::Truthful;
  Provenance provenance;
  friend bool operator==(const GeneratedPair&, const GeneratedPair&) = default;
};

enum class BalanceMode : std::uint8_t {
  /// Emit a Truthful pair for every source record.
  KeepAll,
  /// Drop the Truthful twin of every record whose falsification failed.
  Balanced,
};
std::string_view to_string(BalanceMode mode);
BalanceMode parse_balance_mode(std::string_view text);

struct GenerationInputs {
  const Corpus* corpus = nullptr;
  const TopicIndex* topics = nullptr;
  const EmbeddingStore* image_embeddings = nullptr;
  const EmbeddingStore* text_embeddings = nullptr;
  const Annotations* annotations = nullptr;
  /// Optional precomputed candidate lists; never change results.
  std::vector<const TopKCache*> caches;
};

struct GenerateOptions {
  BalanceMode balance = BalanceMode::KeepAll;
  /// 0 means one worker per hardware thread.
  unsigned workers = 1;
};

struct GenerationFailure {
  RecordId source_id = 0;
  std::string reason;
};

struct GenerationResult {
  /// Sorted by (source id, label).
  std::vector<GeneratedPair> pairs;
  std::vector<GenerationFailure> failures;
};

/// Runs one misinformer over every record of `inputs.corpus`. Output is a
/// pure function of the inputs, the strategy and the balance mode; the
/// worker count only affects speed. Throws MissingInput when the strategy
/// needs embeddings or annotations that were not supplied.
GenerationResult generate(const GenerationInputs& inputs, const Strategy& strategy,
                          const GenerateOptions& options = {});

enum class HybridBalance : std::uint8_t { None, Downsample };
std::string_view to_string(HybridBalance balance);
HybridBalance parse_hybrid_balance(std::string_view text);

struct HybridSpec {
  /// Tags of the two sources: a strategy name or an external dataset name.
  std::string ooc_source;
  std::string nei_source;
  HybridBalance balance = HybridBalance::Downsample;
  std::uint64_t seed = 0;
};

/// Merges a {Truthful, OOC} set and a {Truthful, NEI} set into three classes.
/// Truthful pairs are deduplicated by (image_id, caption). With Downsample
/// every class is reduced to the smallest class size by seeded sampling
/// without replacement. Throws EmptyClass, or InvalidArgument when a source
/// carries the other source's falsified label.
std::vector<GeneratedPair> combine_hybrid(const HybridSpec& spec,
                                          std::span<const GeneratedPair> ooc_pairs,
                                          std::span<const GeneratedPair> nei_pairs);

}  // namespace misinfo
