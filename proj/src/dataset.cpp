#include "misinfo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "json_util.hpp"
#include "misinfo/checksum.hpp"
#include "misinfo/error.hpp"

namespace misinfo {

using detail::ojson;

ClassCounts count_classes(std::span<const GeneratedPair> pairs) {
  ClassCounts c;
  for (const GeneratedPair& p : pairs) {
    switch (p.label) {
      case Label::Truthful: ++c.truthful; break;
      case Label::OOC: ++c.ooc; break;
      case Label::NEI: ++c.nei; break;
    }
  }
  return c;
}

void sort_pairs(std::vector<GeneratedPair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const GeneratedPair& a, const GeneratedPair& b) {
    return std::tie(a.provenance.source_id, a.label) < std::tie(b.provenance.source_id, b.label);
  });
}

std::string serialize_pair(const GeneratedPair& p) {
  ojson j;
  j["image_id"] = p.image_id;
  j["image_ref"] = p.image_ref;
  j["caption"] = p.caption;
  j["label"] = std::string(to_string(p.label));
  ojson prov;
  prov["strategy"] = p.provenance.strategy;
  prov["source_id"] = p.provenance.source_id;
  prov["donor_id"] = p.provenance.donor_id ? ojson(*p.provenance.donor_id) : ojson(nullptr);
  prov["seed"] = p.provenance.seed;
  j["provenance"] = std::move(prov);
  return detail::dump(j);
}

namespace {

GeneratedPair parse_pair(std::string_view text, std::size_t line) {
  const ojson j = detail::parse_line(text, line);
  GeneratedPair p;
  p.image_id = detail::require_u64(j, "image_id", line);
  if (const auto it = j.find("image_ref"); it != j.end() && it->is_string()) {
    p.image_ref = it->get<std::string>();
  }
  p.caption = detail::require_string(j, "caption", line);
  try {
    p.label = parse_label(detail::require_string(j, "label", line));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnknownLabel) throw;
    throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": " + e.what());
  }
  const ojson& prov = detail::require(j, "provenance", line);
  if (!prov.is_object()) {
    throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": provenance must be an object");
  }
  p.provenance.strategy = detail::require_string(prov, "strategy", line);
  p.provenance.source_id = detail::require_u64(prov, "source_id", line);
  if (const auto it = prov.find("donor_id"); it != prov.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) {
      throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": donor_id must be an id");
    }
    p.provenance.donor_id = it->get<RecordId>();
  }
  if (const auto it = prov.find("seed"); it != prov.end() && it->is_number_unsigned()) {
    p.provenance.seed = it->get<std::uint64_t>();
  }
  return p;
}

}  // namespace

std::vector<GeneratedPair> read_dataset(std::istream& in) {
  std::vector<GeneratedPair> pairs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    pairs.push_back(parse_pair(text, line));
  }
  return pairs;
}

std::vector<GeneratedPair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_dataset(in);
}

Manifest emit_dataset(std::span<const GeneratedPair> pairs, Split split,
                      const std::filesystem::path& out_path, const RunInfo& run) {
  std::vector<GeneratedPair> sorted(pairs.begin(), pairs.end());
  sort_pairs(sorted);
  std::string bytes;
  for (const GeneratedPair& p : sorted) {
    bytes += serialize_pair(p);
    bytes += '\n';
  }
  {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + out_path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + out_path.string());
  }
  Manifest m;
  m.dataset = out_path.filename().string();
  m.split = split;
  m.counts = count_classes(sorted);
  m.records = sorted.size();
  m.run = run;
  m.checksum = sha256_hex(bytes);
  return m;
}

std::string manifest_to_json(const Manifest& m) {
  ojson j;
  j["dataset"] = m.dataset;
  j["split"] = std::string(to_string(m.split));
  j["strategy"] = m.run.strategy;
  j["seed"] = m.run.seed;
  j["retry_budget"] = m.run.retry_budget ? ojson(*m.run.retry_budget) : ojson(nullptr);
  j["balance"] = m.run.balance;
  j["records"] = m.records;
  j["counts"] = {{"truthful", m.counts.truthful}, {"ooc", m.counts.ooc}, {"nei", m.counts.nei}};
  j["checksum"] = {{"algorithm", "sha256"}, {"value", m.checksum}};
  ojson config = ojson::object();
  for (const auto& [k, v] : m.run.config) config[k] = v;
  j["config"] = std::move(config);
  return j.dump(2) + "\n";
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << manifest_to_json(manifest);
  if (!out.flush()) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p += ".manifest.json";
  return p;
}

ClassCounts dataset_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  ClassCounts c;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    switch (parse_pair(text, line).label) {
      case Label::Truthful: ++c.truthful; break;
      case Label::OOC: ++c.ooc; break;
      case Label::NEI: ++c.nei; break;
    }
  }
  return c;
}

namespace {

std::string grouped(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out += digits.substr(0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) {
    out += ',';
    out += digits.substr(i, 3);
  }
  return out;
}

}  // namespace

std::string render_stats_table(std::span<const std::pair<std::string, ClassCounts>> rows) {
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Synthetic Misinformer", "Truthful", "OOC", "NEI"});
  for (const auto& [name, c] : rows) {
    cells.push_back({name, grouped(c.truthful), grouped(c.ooc), grouped(c.nei)});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    out += fmt::format("{:<{}}  {:>{}}  {:>{}}  {:>{}}\n", cells[r][0], width[0], cells[r][1],
                       width[1], cells[r][2], width[2], cells[r][3], width[3]);
    if (r == 0) out += std::string(width[0] + width[1] + width[2] + width[3] + 6, '-') + "\n";
  }
  return out;
}

}  // namespace misinfo
