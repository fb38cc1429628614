#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <variant>
#include <vector>

#include "misinfo/corpus.hpp"
#include "misinfo/engine.hpp"
#include "misinfo/eval.hpp"

namespace misinfo {

enum class ExternalFormat : std::uint8_t { NewsCLIPings, MEIR, CosmosTest };

std::string_view to_string(ExternalFormat format);
/// "newsclippings" (or "nc"), "meir", "cosmos-test"; throws UnsupportedFormat.
ExternalFormat parse_external_format(std::string_view text);

/// NewsCLIPings annotation file: one JSON document whose "annotations" list
/// holds {id, image_id, falsified, ...}; id names the caption's record and
/// image_id the image's record. Captions are resolved through `corpus` when
/// given (UnknownRecord if absent there) and left empty otherwise.
std::vector<GeneratedPair> import_newsclippings(std::istream& in, const Corpus* corpus);

/// MEIR export, one object per line: {id, image_id, caption, manipulated,
/// image_ref?}. Manipulated captions become NEI pairs.
std::vector<GeneratedPair> import_meir(std::istream& in);

/// COSMOS test split, one object per line with img_local_path, caption1,
/// caption2 and context_label. Only (image, caption1) is kept; caption2 is
/// discarded on read. context_label 1 marks a falsified item. Item ids are
/// 0-based line positions among non-blank lines.
std::vector<EvalItem> import_cosmos_test(std::istream& in);

using ImportResult = std::variant<std::vector<GeneratedPair>, std::vector<EvalItem>>;

ImportResult import_external(ExternalFormat format, const std::filesystem::path& path,
                             const Corpus* corpus = nullptr);

}  // namespace misinfo
