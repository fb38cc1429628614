#include <gtest/gtest.h>

#include <sstream>

#include "misinfo/error.hpp"
#include "misinfo/eval.hpp"
#include "oracles.hpp"

using namespace misinfo;

namespace {

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

TEST(Binarize, CollapsesFalsifiedClasses) {
  EXPECT_EQ(binarize(PredictedLabel::NEI), BinaryLabel::Falsified);
  EXPECT_EQ(binarize(PredictedLabel::OOC), BinaryLabel::Falsified);
  EXPECT_EQ(binarize(PredictedLabel::Falsified), BinaryLabel::Falsified);
  EXPECT_EQ(binarize(PredictedLabel::Truthful), BinaryLabel::Truthful);
  EXPECT_EQ(binarize("NEI"), BinaryLabel::Falsified);
  EXPECT_EQ(code_of([] { binarize("sarcasm"); }), ErrorCode::UnknownLabel);
}

TEST(Score, TenItemExample) {
  oracle::Gen gen(1);
  const auto [items, preds] = oracle::fixture(4, 1, 2, 3, gen);
  const EvalReport r = score(items, preds);
  EXPECT_EQ(r.n, 10u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(r.specificity, 0.8);
  EXPECT_DOUBLE_EQ(r.sensitivity, 0.6);
  EXPECT_EQ(r.confusion, (Confusion{4, 1, 2, 3}));
}

TEST(Score, AllCorrect) {
  oracle::Gen gen(2);
  const auto [items, preds] = oracle::fixture(5, 0, 0, 5, gen);
  EXPECT_DOUBLE_EQ(score(items, preds).accuracy, 1.0);
}

TEST(Score, RandomizedFixturesMatchOracle) {
  oracle::Gen gen(3);
  for (int round = 0; round < 50; ++round) {
    const std::size_t tt = gen.below(200), tf = gen.below(200), ft = gen.below(200), ff = gen.below(200);
    auto [items, preds] = oracle::fixture(tt, tf, ft, ff, gen);
    const EvalReport r = score(items, preds);
    const oracle::Rates o = oracle::rates(tt, tf, ft, ff);
    EXPECT_EQ(r.accuracy, o.accuracy);
    EXPECT_EQ(r.specificity, o.specificity);
    EXPECT_EQ(r.sensitivity, o.sensitivity);
    EXPECT_EQ(r.confusion.total(), r.n);
    EXPECT_NEAR(r.accuracy * double(r.n), double(tt + ff), 1e-9);
    // Permutation invariance.
    std::reverse(preds.begin(), preds.end());
    EXPECT_EQ(score(items, preds).confusion, r.confusion);
  }
}

TEST(Score, CoverageErrors) {
  oracle::Gen gen(4);
  auto [items, preds] = oracle::fixture(3, 0, 0, 3, gen);
  auto missing = preds;
  missing.pop_back();
  EXPECT_EQ(code_of([&] { score(items, missing); }), ErrorCode::MissingPrediction);
  auto dup = preds;
  dup.push_back(preds.front());
  EXPECT_EQ(code_of([&] { score(items, dup); }), ErrorCode::DuplicatePrediction);
  auto extra = preds;
  extra.push_back({999, PredictedLabel::Truthful, {}});
  EXPECT_EQ(code_of([&] { score(items, extra); }), ErrorCode::UnknownRecord);
}

TEST(Score, EmptyClassRateIsZero) {
  const EvalReport r = make_report({0, 0, 2, 3}, "x");
  EXPECT_EQ(r.specificity, 0.0);
  EXPECT_DOUBLE_EQ(r.sensitivity, 0.6);
  EXPECT_EQ(make_report({}, "x").accuracy, 0.0);
}

TEST(Predictions, ArgmaxWhenLabelAbsent) {
  std::istringstream in(
      R"({"id":1,"scores":[0.2,0.8]})" "\n"
      R"({"id":2,"scores":[0.1,0.3,0.6]})" "\n"
      R"({"id":3,"scores":{"truthful":0.9,"ooc":0.05,"nei":0.05}})" "\n"
      R"({"id":4,"pred_label":"OOC","scores":[0.9,0.1]})" "\n");
  const auto p = read_predictions(in);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[0].label, PredictedLabel::Falsified);
  EXPECT_EQ(p[1].label, PredictedLabel::NEI);
  EXPECT_EQ(p[2].label, PredictedLabel::Truthful);
  EXPECT_EQ(p[3].label, PredictedLabel::OOC);
  std::istringstream neither(R"({"id":1})");
  EXPECT_THROW(read_predictions(neither), Error);
}

TEST(Reports, JsonRoundTripKeepsFullPrecision) {
  const std::vector<EvalReport> reports{make_report({694, 155, 576, 273}, "clip-nest-alt"),
                                        make_report({1, 2, 3, 4}, "rs-c", EvalModality::TextOnly)};
  const auto back = reports_from_json(report_to_json(reports));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].accuracy, reports[0].accuracy);
  EXPECT_EQ(back[1].modality, EvalModality::TextOnly);
  EXPECT_EQ(back[1].confusion, (Confusion{1, 2, 3, 4}));
}

TEST(Render, Table2Row) {
  const std::vector<EvalReport> r{make_report({2854, 778, 886, 2746}, "NC/Bal")};
  const std::string t = render_report(r, ReportLayout::Table2);
  EXPECT_NE(t.find("Accuracy"), std::string::npos);
  EXPECT_NE(t.find("77.09"), std::string::npos);
  EXPECT_NE(t.find("78.58"), std::string::npos);
  EXPECT_NE(t.find("75.61"), std::string::npos);
}

TEST(Render, Table3GroupsModalities) {
  const std::vector<EvalReport> r{
      make_report({694, 155, 576, 273}, "CLIP-NESt-alt", EvalModality::Multimodal),
      make_report({425, 425, 425, 425}, "CLIP-NESt-alt", EvalModality::ImageOnly),
      make_report({632, 218, 494, 356}, "CLIP-NESt-alt + CSt-alt", EvalModality::Multimodal)};
  const std::string t = render_report(r, ReportLayout::Table3);
  for (const char* s : {"Type", "Image-only", "Text-only", "Multimodal", "56.9", "81.7", "32.2",
                        "58.1", "74.4", "41.9", "50.0", "NEI", "Hybrid"}) {
    EXPECT_NE(t.find(s), std::string::npos) << s << "\n" << t;
  }
  EXPECT_NE(t.find('-'), std::string::npos);
  EXPECT_EQ(misinformer_type("cst-alt"), "OOC");
  EXPECT_EQ(misinformer_type("r-nest"), "NEI");
  EXPECT_EQ(misinformer_type("r-nest+cst-alt"), "Hybrid");
}
