#include "misinfo/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "json_util.hpp"
#include "misinfo/error.hpp"

namespace misinfo {

using detail::ojson;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string percent(double value, int decimals) {
  return fmt::format("{:.{}f}", 100.0 * value, decimals);
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Left-aligned text columns, right-aligned numeric ones.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows, std::size_t text_cols) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  const auto emit = [&](std::string& out, const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) line += "  ";
      line += c < text_cols ? fmt::format("{:<{}}", cells[c], width[c])
                            : fmt::format("{:>{}}", cells[c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  };
  std::string out;
  emit(out, header);
  std::size_t rule = 0;
  for (std::size_t c = 0; c < width.size(); ++c) rule += width[c] + (c > 0 ? 2 : 0);
  out += std::string(rule, '-');
  out += '\n';
  for (const auto& row : rows) emit(out, row);
  return out;
}

}  // namespace

std::string_view to_string(BinaryLabel label) {
  return label == BinaryLabel::Truthful ? "truthful" : "falsified";
}

std::string_view to_string(PredictedLabel label) {
  switch (label) {
    case PredictedLabel::Truthful: return "truthful";
    case PredictedLabel::OOC: return "ooc";
    case PredictedLabel::NEI: return "nei";
    case PredictedLabel::Falsified: return "falsified";
  }
  return "truthful";
}

PredictedLabel parse_predicted_label(std::string_view text) {
  const std::string l = lower(text);
  if (l == "truthful") return PredictedLabel::Truthful;
  if (l == "ooc") return PredictedLabel::OOC;
  if (l == "nei") return PredictedLabel::NEI;
  if (l == "falsified") return PredictedLabel::Falsified;
  throw Error(ErrorCode::UnknownLabel, "'" + std::string(text) + "'");
}

BinaryLabel parse_binary_label(std::string_view text) {
  return binarize(parse_predicted_label(text));
}

BinaryLabel binarize(PredictedLabel label) {
  return label == PredictedLabel::Truthful ? BinaryLabel::Truthful : BinaryLabel::Falsified;
}

BinaryLabel binarize(std::string_view label) { return binarize(parse_predicted_label(label)); }

std::string_view to_string(EvalModality modality) {
  switch (modality) {
    case EvalModality::ImageOnly: return "image-only";
    case EvalModality::TextOnly: return "text-only";
    case EvalModality::Multimodal: return "multimodal";
  }
  return "multimodal";
}

EvalModality parse_eval_modality(std::string_view text) {
  const std::string l = lower(text);
  if (l == "image-only") return EvalModality::ImageOnly;
  if (l == "text-only") return EvalModality::TextOnly;
  if (l == "multimodal") return EvalModality::Multimodal;
  throw Error(ErrorCode::InvalidArgument, "unknown modality tag '" + std::string(text) + "'");
}

ReportLayout parse_report_layout(std::string_view text) {
  const std::string l = lower(text);
  if (l == "table2") return ReportLayout::Table2;
  if (l == "table3") return ReportLayout::Table3;
  throw Error(ErrorCode::InvalidArgument, "unknown layout '" + std::string(text) + "'");
}

EvalReport make_report(const Confusion& c, std::string strategy, EvalModality modality) {
  EvalReport r;
  r.n = c.total();
  r.confusion = c;
  r.accuracy = ratio(c.truthful_as_truthful + c.falsified_as_falsified, r.n);
  r.specificity = ratio(c.truthful_as_truthful, c.truthful_as_truthful + c.truthful_as_falsified);
  r.sensitivity =
      ratio(c.falsified_as_falsified, c.falsified_as_falsified + c.falsified_as_truthful);
  r.strategy = std::move(strategy);
  r.modality = modality;
  return r;
}

EvalReport score(std::span<const EvalItem> benchmark, std::span<const Prediction> predictions,
                 std::string strategy, EvalModality modality) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(benchmark.size());
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    if (!index.emplace(benchmark[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId, "benchmark item " + std::to_string(benchmark[i].id));
    }
  }
  std::vector<char> covered(benchmark.size(), 0);
  Confusion c;
  for (const Prediction& p : predictions) {
    const auto it = index.find(p.id);
    if (it == index.end()) {
      throw Error(ErrorCode::UnknownRecord, "prediction for id " + std::to_string(p.id) +
                                                " outside the benchmark");
    }
    if (covered[it->second]) throw Error(ErrorCode::DuplicatePrediction, std::to_string(p.id));
    covered[it->second] = 1;
    const bool truth_truthful = benchmark[it->second].label == BinaryLabel::Truthful;
    const bool pred_truthful = binarize(p.label) == BinaryLabel::Truthful;
    if (truth_truthful) {
      ++(pred_truthful ? c.truthful_as_truthful : c.truthful_as_falsified);
    } else {
      ++(pred_truthful ? c.falsified_as_truthful : c.falsified_as_falsified);
    }
  }
  std::vector<std::uint64_t> missing;
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    if (!covered[i]) missing.push_back(benchmark[i].id);
  }
  if (!missing.empty()) {
    std::string ids;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) {
      ids += (i ? "," : "") + std::to_string(missing[i]);
    }
    if (missing.size() > 10) ids += ",...";
    throw Error(ErrorCode::MissingPrediction,
                std::to_string(missing.size()) + " benchmark ids uncovered: " + ids);
  }
  return make_report(c, std::move(strategy), modality);
}

std::string misinformer_type(std::string_view strategy) {
  const std::string l = lower(strategy);
  if (l.find('+') != std::string::npos) return "Hybrid";
  if (l.find("nest") != std::string::npos || l == "meir") return "NEI";
  if (l.starts_with("rs") || l.starts_with("cst") || l.starts_with("nc")) return "OOC";
  return "-";
}

std::string render_report(std::span<const EvalReport> reports, ReportLayout layout) {
  if (layout == ReportLayout::Table2) {
    std::vector<std::vector<std::string>> rows;
    for (const EvalReport& r : reports) {
      rows.push_back({r.strategy, percent(r.accuracy, 2), percent(r.specificity, 2),
                      percent(r.sensitivity, 2)});
    }
    return format_table({"Synthetic Misinformer", "Accuracy", "Truthful", "Falsified"}, rows, 1);
  }

  struct Group {
    std::string strategy;
    const EvalReport* by_modality[3] = {nullptr, nullptr, nullptr};
  };
  std::vector<Group> groups;
  for (const EvalReport& r : reports) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.strategy == r.strategy; });
    if (it == groups.end()) {
      groups.push_back({r.strategy});
      it = groups.end() - 1;
    }
    auto& slot = it->by_modality[static_cast<std::size_t>(r.modality)];
    if (slot == nullptr) slot = &r;
  }
  std::vector<std::vector<std::string>> rows;
  for (const Group& g : groups) {
    const auto acc = [&](EvalModality m) {
      const EvalReport* r = g.by_modality[static_cast<std::size_t>(m)];
      return r ? percent(r->accuracy, 1) : std::string("-");
    };
    const EvalReport* mm = g.by_modality[static_cast<std::size_t>(EvalModality::Multimodal)];
    rows.push_back({misinformer_type(g.strategy), g.strategy, acc(EvalModality::ImageOnly),
                    acc(EvalModality::TextOnly), acc(EvalModality::Multimodal),
                    mm ? percent(mm->specificity, 1) : "-", mm ? percent(mm->sensitivity, 1) : "-"});
  }
  return format_table(
      {"Type", "Synthetic Misinformer", "Image-only", "Text-only", "Multimodal", "Truthful",
       "Falsified"},
      rows, 2);
}

// ---------------------------------------------------------------------------
// Files

std::vector<EvalItem> read_benchmark(std::istream& in) {
  std::vector<EvalItem> items;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    EvalItem item;
    item.id = detail::require_u64(j, "id", line);
    item.image_id = detail::require_string(j, "image_id", line);
    item.caption = detail::require_string(j, "caption", line);
    const std::string label = detail::require_string(j, "label", line);
    const std::string l = lower(label);
    if (l != "truthful" && l != "falsified") {
      throw Error(ErrorCode::UnknownLabel, detail::line_tag(line) + ": '" + label + "'");
    }
    item.label = parse_binary_label(l);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<EvalItem> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_benchmark(in);
}

void write_benchmark(std::span<const EvalItem> items, std::ostream& out) {
  for (const EvalItem& item : items) {
    ojson j;
    j["id"] = item.id;
    j["image_id"] = item.image_id;
    j["caption"] = item.caption;
    j["label"] = std::string(to_string(item.label));
    out << detail::dump(j) << '\n';
  }
}

namespace {

PredictedLabel argmax_label(const ojson& scores, std::vector<double>& out, std::size_t line) {
  static constexpr PredictedLabel kThree[] = {PredictedLabel::Truthful, PredictedLabel::OOC,
                                              PredictedLabel::NEI};
  static constexpr PredictedLabel kTwo[] = {PredictedLabel::Truthful, PredictedLabel::Falsified};
  std::vector<PredictedLabel> labels;
  if (scores.is_array()) {
    for (const ojson& v : scores) {
      if (!v.is_number()) {
        throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": non-numeric score");
      }
      out.push_back(v.get<double>());
    }
    if (out.size() == 2) {
      labels.assign(std::begin(kTwo), std::end(kTwo));
    } else if (out.size() == 3) {
      labels.assign(std::begin(kThree), std::end(kThree));
    } else {
      throw Error(ErrorCode::MalformedRecord,
                  detail::line_tag(line) + ": score list must have 2 or 3 entries");
    }
  } else if (scores.is_object()) {
    for (const PredictedLabel l : {PredictedLabel::Truthful, PredictedLabel::OOC,
                                   PredictedLabel::NEI, PredictedLabel::Falsified}) {
      const auto it = scores.find(std::string(to_string(l)));
      if (it == scores.end()) continue;
      if (!it->is_number()) {
        throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": non-numeric score");
      }
      labels.push_back(l);
      out.push_back(it->get<double>());
    }
    if (labels.size() != scores.size() || labels.empty()) {
      throw Error(ErrorCode::UnknownLabel, detail::line_tag(line) + ": unrecognised score keys");
    }
  } else {
    throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": scores must be a list or object");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] > out[best]) best = i;
  }
  return labels[best];
}

}  // namespace

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> predictions;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::is_blank(text)) continue;
    const ojson j = detail::parse_line(text, line);
    Prediction p;
    p.id = detail::require_u64(j, "id", line);
    const auto label = j.find("pred_label");
    const auto scores = j.find("scores");
    const bool has_scores = scores != j.end() && !scores->is_null();
    if (label != j.end() && !label->is_null()) {
      if (!label->is_string()) {
        throw Error(ErrorCode::MalformedRecord, detail::line_tag(line) + ": pred_label must be a string");
      }
      p.label = parse_predicted_label(label->get<std::string>());
      if (has_scores) argmax_label(*scores, p.scores, line);
    } else if (has_scores) {
      p.label = argmax_label(*scores, p.scores, line);
    } else {
      throw Error(ErrorCode::MissingField, "pred_label (" + detail::line_tag(line) + ")");
    }
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_predictions(in);
}

void write_predictions(std::span<const Prediction> predictions, std::ostream& out) {
  for (const Prediction& p : predictions) {
    ojson j;
    j["id"] = p.id;
    j["pred_label"] = std::string(to_string(p.label));
    if (!p.scores.empty()) j["scores"] = p.scores;
    out << detail::dump(j) << '\n';
  }
}

std::string report_to_json(std::span<const EvalReport> reports) {
  ojson doc;
  doc["reports"] = ojson::array();
  for (const EvalReport& r : reports) {
    ojson j;
    j["strategy"] = r.strategy;
    j["modality"] = std::string(to_string(r.modality));
    j["n"] = r.n;
    j["confusion"] = {{"tt", r.confusion.truthful_as_truthful},
                      {"tf", r.confusion.truthful_as_falsified},
                      {"ft", r.confusion.falsified_as_truthful},
                      {"ff", r.confusion.falsified_as_falsified}};
    j["accuracy"] = r.accuracy;
    j["specificity"] = r.specificity;
    j["sensitivity"] = r.sensitivity;
    doc["reports"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  const ojson doc = ojson::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.contains("reports") || !doc["reports"].is_array()) {
    throw Error(ErrorCode::MalformedRecord, "report document must hold a 'reports' list");
  }
  std::vector<EvalReport> out;
  std::size_t i = 0;
  for (const ojson& j : doc["reports"]) {
    ++i;
    const ojson& c = detail::require(j, "confusion", i);
    Confusion conf{detail::require_u64(c, "tt", i), detail::require_u64(c, "tf", i),
                   detail::require_u64(c, "ft", i), detail::require_u64(c, "ff", i)};
    out.push_back(make_report(conf, detail::require_string(j, "strategy", i),
                              parse_eval_modality(detail::require_string(j, "modality", i))));
  }
  return out;
}

std::vector<EvalReport> load_reports(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return reports_from_json(buffer.str());
}

}  // namespace misinfo
