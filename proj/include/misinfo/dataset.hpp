#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "misinfo/corpus.hpp"
#include "misinfo/engine.hpp"

namespace misinfo {

struct ClassCounts {
  std::size_t truthful = 0;
  std::size_t ooc = 0;
  std::size_t nei = 0;

  std::size_t total() const noexcept { return truthful + ooc + nei; }
  std::size_t falsified() const noexcept { return ooc + nei; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_classes(std::span<const GeneratedPair> pairs);

/// What the caller knows about the run that produced a dataset.
struct RunInfo {
  std::string strategy;
  std::uint64_t seed = 0;
  std::optional<std::uint32_t> retry_budget;
  std::string balance;
  /// Resolved run configuration, echoed verbatim into the manifest.
  std::map<std::string, std::string> config;
};

struct Manifest {
  std::string dataset;  // file name of the dataset
  Split split = Split::Train;
  ClassCounts counts;
  std::size_t records = 0;
  RunInfo run;
  std::string checksum;  // SHA-256 of the dataset bytes
};

/// Deterministic ordering: by source id, then label.
void sort_pairs(std::vector<GeneratedPair>& pairs);

std::string serialize_pair(const GeneratedPair& pair);
std::vector<GeneratedPair> read_dataset(std::istream& in);
std::vector<GeneratedPair> load_dataset(const std::filesystem::path& path);

/// Writes the pairs (re-sorted) as newline-delimited records and returns the
/// manifest covering the written bytes. Throws IoFailure.
Manifest emit_dataset(std::span<const GeneratedPair> pairs, Split split,
                      const std::filesystem::path& out_path, const RunInfo& run);

std::string manifest_to_json(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
/// `<dataset>.manifest.json` next to the dataset file.
std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);

/// Exact per-label counts of a dataset file. Throws MalformedRecord.
ClassCounts dataset_stats(const std::filesystem::path& path);

/// Per-class count table with thousands separators, one row per dataset.
std::string render_stats_table(std::span<const std::pair<std::string, ClassCounts>> rows);

}  // namespace misinfo
