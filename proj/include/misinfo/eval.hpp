#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace misinfo {

enum class BinaryLabel : std::uint8_t { Truthful, Falsified };

/// Detector output classes: the three-class hybrid labels plus the binary
/// Falsified label emitted by single-strategy detectors.
enum class PredictedLabel : std::uint8_t { Truthful, OOC, NEI, Falsified };

std::string_view to_string(BinaryLabel label);
std::string_view to_string(PredictedLabel label);
/// Accepts truthful/ooc/nei/falsified in any letter case; throws UnknownLabel.
PredictedLabel parse_predicted_label(std::string_view text);
BinaryLabel parse_binary_label(std::string_view text);

/// OOC and NEI collapse to Falsified.
BinaryLabel binarize(PredictedLabel label);
BinaryLabel binarize(std::string_view label);

/// One benchmark item: an image and its single caption.
struct EvalItem {
  std::uint64_t id = 0;
  std::string image_id;
  std::string caption;
  BinaryLabel label = BinaryLabel::Truthful;
  friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

struct Prediction {
  std::uint64_t id = 0;
  PredictedLabel label = PredictedLabel::Truthful;
  /// Per-class scores when the file carried them (order as in the file).
  std::vector<double> scores;
};

enum class EvalModality : std::uint8_t { ImageOnly, TextOnly, Multimodal };
std::string_view to_string(EvalModality modality);
EvalModality parse_eval_modality(std::string_view text);

/// Rows are the true class, columns the predicted class.
struct Confusion {
  std::size_t truthful_as_truthful = 0;    // TT
  std::size_t truthful_as_falsified = 0;   // TF
  std::size_t falsified_as_truthful = 0;   // FT
  std::size_t falsified_as_falsified = 0;  // FF

  std::size_t total() const noexcept {
    return truthful_as_truthful + truthful_as_falsified + falsified_as_truthful +
           falsified_as_falsified;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct EvalReport {
  std::size_t n = 0;
  Confusion confusion;
  double accuracy = 0.0;
  double specificity = 0.0;  // truthful hit rate
  double sensitivity = 0.0;  // falsified hit rate
  std::string strategy;
  EvalModality modality = EvalModality::Multimodal;
};

/// Derives the rates from counts. A class with no items gets a hit rate of 0.
EvalReport make_report(const Confusion& confusion, std::string strategy,
                       EvalModality modality = EvalModality::Multimodal);

/// Predictions must cover the benchmark ids exactly: MissingPrediction lists
/// uncovered ids, DuplicatePrediction names a repeated id, UnknownRecord an
/// id outside the benchmark.
EvalReport score(std::span<const EvalItem> benchmark, std::span<const Prediction> predictions,
                 std::string strategy = {}, EvalModality modality = EvalModality::Multimodal);

enum class ReportLayout : std::uint8_t { Table2, Table3 };
ReportLayout parse_report_layout(std::string_view text);

/// Aligned plain-text table. Table2: Strategy, Accuracy, Truthful, Falsified
/// as percentages with two decimals, one row per report. Table3: one row per
/// strategy, with Type, Strategy, Image-only, Text-only and Multimodal
/// accuracies and the multimodal Truthful/Falsified hit rates, one decimal.
std::string render_report(std::span<const EvalReport> reports, ReportLayout layout);

/// OOC, NEI or Hybrid for a strategy tag; "-" when unrecognised.
std::string misinformer_type(std::string_view strategy);

std::vector<EvalItem> read_benchmark(std::istream& in);
std::vector<EvalItem> load_benchmark(const std::filesystem::path& path);
void write_benchmark(std::span<const EvalItem> items, std::ostream& out);

/// Lines {id, pred_label, scores?}. Without pred_label the label is the
/// argmax of scores, given either as an object keyed by class name or as a
/// list in [truthful, falsified] or [truthful, ooc, nei] order.
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void write_predictions(std::span<const Prediction> predictions, std::ostream& out);

/// Machine-readable report: full-precision values, one JSON document.
std::string report_to_json(std::span<const EvalReport> reports);
std::vector<EvalReport> reports_from_json(std::string_view text);
std::vector<EvalReport> load_reports(const std::filesystem::path& path);

}  // namespace misinfo
