#include "misinfo/engine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "misinfo/entity_swap.hpp"
#include "misinfo/error.hpp"
#include "misinfo/parallel.hpp"
#include "misinfo/seed.hpp"

namespace misinfo {

namespace {

constexpr std::array<std::string_view, 11> kCanonical = {
    "rs-c",   "rst-c",  "rst-i",  "rst-alt",     "cst-c",      "cst-i",
    "cst-alt", "r-nest", "clip-nest-c", "clip-nest-i", "clip-nest-alt"};
constexpr std::array<std::string_view, 11> kDisplay = {
    "RS-C",   "RSt-C",  "RSt-I",  "RSt-alt",     "CSt-C",      "CSt-I",
    "CSt-alt", "R-NESt", "CLIP-NESt-C", "CLIP-NESt-I", "CLIP-NESt-alt"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t index_of(StrategyKind kind) { return static_cast<std::size_t>(kind); }

}  // namespace

std::string_view to_string(StrategyKind kind) { return kCanonical[index_of(kind)]; }
std::string_view display_name(StrategyKind kind) { return kDisplay[index_of(kind)]; }

std::optional<StrategyKind> parse_strategy_kind(std::string_view text) {
  const std::string l = lower(text);
  for (std::size_t i = 0; i < kCanonical.size(); ++i) {
    if (kCanonical[i] == l) return kStrategyKinds[i];
  }
  return std::nullopt;
}

bool produces_nei(StrategyKind kind) {
  return kind == StrategyKind::R_NESt || kind == StrategyKind::CLIP_NESt_C ||
         kind == StrategyKind::CLIP_NESt_I || kind == StrategyKind::CLIP_NESt_alt;
}

bool needs_embeddings(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::CSt_C:
    case StrategyKind::CSt_I:
    case StrategyKind::CSt_alt:
    case StrategyKind::CLIP_NESt_C:
    case StrategyKind::CLIP_NESt_I:
    case StrategyKind::CLIP_NESt_alt: return true;
    default: return false;
  }
}

bool needs_annotations(StrategyKind kind) { return produces_nei(kind); }

std::uint64_t kind_tag(StrategyKind kind) { return index_of(kind) + 1; }

std::uint64_t record_seed(const Strategy& strategy, RecordId id) {
  return mix_seed(strategy.seed, id, kind_tag(strategy.kind));
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Truthful: return "truthful";
    case Label::OOC: return "ooc";
    case Label::NEI: return "nei";
  }
  return "truthful";
}

Label parse_label(std::string_view text) {
  const std::string l = lower(text);
  if (l == "truthful") return Label::Truthful;
  if (l == "ooc") return Label::OOC;
  if (l == "nei") return Label::NEI;
  throw Error(ErrorCode::UnknownLabel, "'" + std::string(text) + "'");
}

std::string_view to_string(BalanceMode mode) {
  return mode == BalanceMode::KeepAll ? "keep-all" : "balanced";
}

BalanceMode parse_balance_mode(std::string_view text) {
  if (text == "keep-all") return BalanceMode::KeepAll;
  if (text == "balanced") return BalanceMode::Balanced;
  throw Error(ErrorCode::InvalidArgument, "unknown balance mode '" + std::string(text) + "'");
}

std::string_view to_string(HybridBalance balance) {
  return balance == HybridBalance::None ? "none" : "downsample";
}

HybridBalance parse_hybrid_balance(std::string_view text) {
  if (text == "none") return HybridBalance::None;
  if (text == "downsample") return HybridBalance::Downsample;
  throw Error(ErrorCode::InvalidArgument, "unknown hybrid balance '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

enum class Variant { Image, Caption };

/// Everything a worker needs, shared read-only.
struct Context {
  const Corpus& corpus;
  const TopicIndex& topics;
  const Annotations* annotations;
  const SimilarityIndex* index;
  const EntityPool* pool;
  const Strategy& strategy;
};

struct Outcome {
  std::optional<GeneratedPair> falsified;
  std::string failure;
};

// Uniform draw over the records of `candidates` (positions into the corpus)
// that are not the source and do not share its caption. Rejection first;
// an exact enumeration takes over when admissible records are rare.
std::optional<std::size_t> draw_admissible(const Corpus& corpus, std::span<const std::size_t> candidates,
                                           const NewsRecord& source, SplitMix64& rng) {
  const auto ok = [&](std::size_t pos) {
    const NewsRecord& r = corpus[pos];
    return r.id != source.id && r.caption != source.caption;
  };
  if (candidates.empty()) return std::nullopt;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::size_t pos = candidates[uniform_below(rng, candidates.size())];
    if (ok(pos)) return pos;
  }
  std::vector<std::size_t> admissible;
  for (const std::size_t pos : candidates) {
    if (ok(pos)) admissible.push_back(pos);
  }
  if (admissible.empty()) return std::nullopt;
  return admissible[uniform_below(rng, admissible.size())];
}

GeneratedPair ooc_pair(const NewsRecord& source, const NewsRecord& donor, Variant variant,
                       const Strategy& strategy, std::uint64_t seed) {
  GeneratedPair p;
  p.label = Label::OOC;
  if (variant == Variant::Image) {
    p.image_id = donor.id;
    p.image_ref = donor.image_ref;
    p.caption = source.caption;
  } else {
    p.image_id = source.id;
    p.image_ref = source.image_ref;
    p.caption = donor.caption;
  }
  p.provenance = {std::string(to_string(strategy.kind)), source.id, donor.id, seed};
  return p;
}

Variant fixed_variant(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::RSt_I:
    case StrategyKind::CSt_I:
    case StrategyKind::CLIP_NESt_I: return Variant::Image;
    default: return Variant::Caption;
  }
}

bool alternates(StrategyKind kind) {
  return kind == StrategyKind::RSt_alt || kind == StrategyKind::CSt_alt ||
         kind == StrategyKind::CLIP_NESt_alt;
}

Modality space_of(Variant v) { return v == Variant::Image ? Modality::Image : Modality::Text; }

Outcome falsify(const Context& ctx, const NewsRecord& source, std::span<const std::size_t> all_positions,
                std::span<const std::size_t> topic_positions) {
  const StrategyKind kind = ctx.strategy.kind;
  const std::uint64_t seed = record_seed(ctx.strategy, source.id);
  SplitMix64 rng(seed);
  // The coin is always the first draw of the record's stream.
  const Variant variant = alternates(kind) ? (fair_coin(rng) ? Variant::Caption : Variant::Image)
                                           : fixed_variant(kind);
  Outcome out;

  switch (kind) {
    case StrategyKind::RS_C:
    case StrategyKind::RSt_C:
    case StrategyKind::RSt_I:
    case StrategyKind::RSt_alt: {
      const auto pool = kind == StrategyKind::RS_C ? all_positions : topic_positions;
      const auto pick = draw_admissible(ctx.corpus, pool, source, rng);
      if (!pick) {
        out.failure = "no admissible random candidate";
        return out;
      }
      out.falsified = ooc_pair(source, ctx.corpus[*pick], variant, ctx.strategy, seed);
      return out;
    }
    case StrategyKind::CSt_C:
    case StrategyKind::CSt_I:
    case StrategyKind::CSt_alt: {
      CandidateFilter filter;
      filter.exclude_identical_captions = true;
      const Modality space = space_of(variant);
      const auto best = ctx.index->top_k(source.id, space, space, filter, 1);
      if (best.empty()) {
        out.failure = "no in-topic candidate";
        return out;
      }
      out.falsified = ooc_pair(source, ctx.corpus.at(best.front()), variant, ctx.strategy, seed);
      return out;
    }
    case StrategyKind::R_NESt: {
      const auto& entities = ctx.annotations->entities(source.id);
      if (entities.empty()) {
        out.failure = "caption has no entities";
        return out;
      }
      try {
        const SwapResult swap = random_swap(source, entities, *ctx.pool, seed);
        GeneratedPair p;
        p.image_id = source.id;
        p.image_ref = source.image_ref;
        p.caption = swap.falsified_caption;
        p.label = Label::NEI;
        p.provenance = {std::string(to_string(kind)), source.id, std::nullopt, seed};
        out.falsified = std::move(p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoAdmissibleReplacement) throw;
        out.failure = e.what();
      }
      return out;
    }
    case StrategyKind::CLIP_NESt_C:
    case StrategyKind::CLIP_NESt_I:
    case StrategyKind::CLIP_NESt_alt: {
      const auto& entities = ctx.annotations->entities(source.id);
      if (entities.empty()) {
        out.failure = "caption has no entities";
        return out;
      }
      CandidateFilter filter;
      filter.exclude_identical_captions = true;
      const Annotations* ann = ctx.annotations;
      filter.predicate = [ann](RecordId id) { return ann->has_entities(id); };
      const Modality space = space_of(variant);
      const auto ranked = ctx.index->top_k(source.id, space, space, filter,
                                           std::size_t{ctx.strategy.retry_budget} + 1);
      for (const RecordId donor_id : ranked) {
        const NewsRecord& donor = ctx.corpus.at(donor_id);
        try {
          const SwapResult swap = pairwise_swap(source, entities, donor, ann->entities(donor_id));
          GeneratedPair p;
          p.image_id = source.id;
          p.image_ref = source.image_ref;
          p.caption = swap.falsified_caption;
          p.label = Label::NEI;
          p.provenance = {std::string(to_string(kind)), source.id, donor_id, seed};
          out.falsified = std::move(p);
          return out;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InadmissiblePair) throw;
        }
      }
      out.failure = ranked.empty() ? "no in-topic candidate with entities"
                                   : "no admissible pair within retry budget";
      return out;
    }
  }
  out.failure = "unhandled strategy";
  return out;
}

}  // namespace

GenerationResult generate(const GenerationInputs& inputs, const Strategy& strategy,
                          const GenerateOptions& options) {
  const std::string kind_name(to_string(strategy.kind));
  if (inputs.corpus == nullptr) throw Error(ErrorCode::MissingInput, kind_name + ": corpus");
  const Corpus& corpus = *inputs.corpus;

  std::optional<TopicIndex> own_topics;
  const TopicIndex* topics = inputs.topics;
  if (topics == nullptr) topics = &own_topics.emplace(corpus);

  if (needs_annotations(strategy.kind) && inputs.annotations == nullptr) {
    throw Error(ErrorCode::MissingInput, kind_name + ": entity annotations");
  }
  std::optional<SimilarityIndex> index;
  if (needs_embeddings(strategy.kind)) {
    const bool image = strategy.kind != StrategyKind::CSt_C && strategy.kind != StrategyKind::CLIP_NESt_C;
    const bool text = strategy.kind != StrategyKind::CSt_I && strategy.kind != StrategyKind::CLIP_NESt_I;
    if (image && inputs.image_embeddings == nullptr) {
      throw Error(ErrorCode::MissingInput, kind_name + ": image embeddings");
    }
    if (text && inputs.text_embeddings == nullptr) {
      throw Error(ErrorCode::MissingInput, kind_name + ": text embeddings");
    }
    index.emplace(corpus, *topics, image ? inputs.image_embeddings : nullptr,
                  text ? inputs.text_embeddings : nullptr);
    for (const TopKCache* cache : inputs.caches) {
      if (cache != nullptr && index->has_store(cache->query_space()) &&
          index->has_store(cache->candidate_space())) {
        index->attach_cache(*cache);
      }
    }
  }
  std::optional<EntityPool> pool;
  if (strategy.kind == StrategyKind::R_NESt) pool.emplace(*inputs.annotations, *topics);

  // Corpus positions, overall and per topic, for the random samplers.
  std::vector<std::size_t> all_positions(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) all_positions[i] = i;
  std::vector<std::vector<std::size_t>> topic_positions(topics->topic_count());
  for (std::size_t t = 0; t < topics->topic_count(); ++t) {
    for (const RecordId id : topics->bucket_at(t)) topic_positions[t].push_back(corpus.position(id));
  }

  const Context ctx{corpus, *topics, inputs.annotations, index ? &*index : nullptr,
                    pool ? &*pool : nullptr, strategy};
  std::vector<Outcome> outcomes(corpus.size());
  parallel_for(corpus.size(), options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NewsRecord& r = corpus[i];
      outcomes[i] = falsify(ctx, r, all_positions, topic_positions[topics->topic_number(r.id)]);
    }
  });

  GenerationResult result;
  result.pairs.reserve(2 * corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const NewsRecord& r = corpus[i];
    Outcome& o = outcomes[i];
    if (!o.falsified) {
      spdlog::debug("{}: record {} not falsified: {}", kind_name, r.id, o.failure);
      result.failures.push_back({r.id, std::move(o.failure)});
      if (options.balance == BalanceMode::Balanced) continue;
    }
    GeneratedPair truthful;
    truthful.image_id = r.id;
    truthful.image_ref = r.image_ref;
    truthful.caption = r.caption;
    truthful.label = Label::Truthful;
    truthful.provenance = {kind_name, r.id, std::nullopt, record_seed(strategy, r.id)};
    result.pairs.push_back(std::move(truthful));
    if (o.falsified) result.pairs.push_back(std::move(*o.falsified));
  }
  std::stable_sort(result.pairs.begin(), result.pairs.end(),
                   [](const GeneratedPair& a, const GeneratedPair& b) {
                     return std::tie(a.provenance.source_id, a.label) <
                            std::tie(b.provenance.source_id, b.label);
                   });
  if (!result.failures.empty()) {
    spdlog::info("{}: {} of {} records could not be falsified", kind_name, result.failures.size(),
                 corpus.size());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Hybrids

std::vector<GeneratedPair> combine_hybrid(const HybridSpec& spec,
                                          std::span<const GeneratedPair> ooc_pairs,
                                          std::span<const GeneratedPair> nei_pairs) {
  std::array<std::vector<GeneratedPair>, 3> classes;
  std::set<std::pair<RecordId, std::string>> seen_truthful;
  const auto take = [&](std::span<const GeneratedPair> pairs, Label falsified, const std::string& tag) {
    for (const GeneratedPair& p : pairs) {
      if (p.label == Label::Truthful) {
        if (seen_truthful.emplace(p.image_id, p.caption).second) classes[0].push_back(p);
      } else if (p.label == falsified) {
        classes[static_cast<std::size_t>(falsified)].push_back(p);
      } else {
        throw Error(ErrorCode::InvalidArgument,
                    tag + " source carries " + std::string(to_string(p.label)) + " pairs");
      }
    }
  };
  take(ooc_pairs, Label::OOC, spec.ooc_source.empty() ? "OOC" : spec.ooc_source);
  take(nei_pairs, Label::NEI, spec.nei_source.empty() ? "NEI" : spec.nei_source);

  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].empty()) {
      throw Error(ErrorCode::EmptyClass, std::string(to_string(static_cast<Label>(c))));
    }
  }
  if (spec.balance == HybridBalance::Downsample) {
    std::size_t target = classes[0].size();
    for (const auto& c : classes) target = std::min(target, c.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
      auto& members = classes[c];
      if (members.size() == target) continue;
      // Partial Fisher-Yates over positions, then restore original order.
      SplitMix64 rng(mix_seed(spec.seed, c, 0x485942ULL));
      std::vector<std::size_t> order(members.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = 0; i < target; ++i) {
        const std::size_t j = i + uniform_below(rng, order.size() - i);
        std::swap(order[i], order[j]);
      }
      order.resize(target);
      std::sort(order.begin(), order.end());
      std::vector<GeneratedPair> kept;
      kept.reserve(target);
      for (const std::size_t i : order) kept.push_back(std::move(members[i]));
      members = std::move(kept);
    }
  }
  std::vector<GeneratedPair> out;
  for (auto& c : classes) {
    for (auto& p : c) out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(), [](const GeneratedPair& a, const GeneratedPair& b) {
    return std::tie(a.provenance.source_id, a.label) < std::tie(b.provenance.source_id, b.label);
  });
  return out;
}

}  // namespace misinfo
