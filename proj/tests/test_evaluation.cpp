#include <algorithm>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "dip3d/errors.hpp"
#include "dip3d/evaluation.hpp"

namespace dip3d {
namespace {

Error expect_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::kIo, "");
}

GroundTruth truth_for(const std::string& id) {
  GroundTruth t;
  t.frame_id = id;
  t.true_selection = 1;
  t.intended_target = 1;
  t.true_left_pixels = {{100, 100}, {400, 300}, {700, 300}};
  t.true_distances = {0.5, 0.0, 0.4};
  t.selection_margin = 0.4;
  return t;
}

SelectionResult selection_at(const std::string& id, PixelPoint p) {
  SelectionResult r;
  r.frame_id = id;
  r.selected_index = 0;
  r.object_2d_left = p;
  return r;
}

TEST(ScoreFrame, CorrectWithPixelError) {
  const EvalRecord r = score_frame(selection_at("f", {403, 304}), truth_for("f"));
  EXPECT_EQ(r.outcome, Outcome::kCorrect);
  ASSERT_TRUE(r.predicted_index.has_value());
  EXPECT_EQ(*r.predicted_index, 1);
  EXPECT_EQ(r.true_index, 1);
  ASSERT_TRUE(r.pixel_error.has_value());
  EXPECT_DOUBLE_EQ(*r.pixel_error, 5.0);
}

TEST(ScoreFrame, WrongObject) {
  const EvalRecord r = score_frame(selection_at("f", {690, 300}), truth_for("f"));
  EXPECT_EQ(r.outcome, Outcome::kWrong);
  EXPECT_EQ(r.predicted_index, 2);
  EXPECT_DOUBLE_EQ(*r.pixel_error, 290.0);
}

TEST(ScoreFrame, RejectedKeepsReason) {
  const Rejection rej{"f", ErrorCode::kNoCandidates, "select", "", "empty", {}};
  const EvalRecord r = score_frame(rej, truth_for("f"));
  EXPECT_EQ(r.outcome, Outcome::kRejected);
  EXPECT_EQ(r.reject_reason, "NoCandidates");
  EXPECT_FALSE(r.predicted_index.has_value());
  EXPECT_FALSE(r.pixel_error.has_value());
}

TEST(ScoreFrame, IdMismatch) {
  EXPECT_EQ(expect_error([] { score_frame(selection_at("a", {0, 0}), truth_for("b")); }).code(),
            ErrorCode::kIdMismatch);
}

EvalRecord record(const std::string& id, Outcome o, double err, int pred = 1) {
  EvalRecord r;
  r.frame_id = id;
  r.true_index = 1;
  r.outcome = o;
  if (o == Outcome::kRejected) {
    r.reject_reason = "InfeasiblePose";
  } else {
    r.predicted_index = pred;
    r.pixel_error = err;
  }
  return r;
}

TEST(Summarize, MeanAndSampleStd) {
  const EvalSummary s = summarize({record("a", Outcome::kCorrect, 1.0),
                                   record("b", Outcome::kCorrect, 2.0),
                                   record("c", Outcome::kCorrect, 3.0)});
  EXPECT_EQ(s.count, 3);
  EXPECT_DOUBLE_EQ(s.accuracy, 1.0);
  ASSERT_TRUE(s.pixel_error.has_value());
  EXPECT_DOUBLE_EQ(s.pixel_error->mean, 2.0);
  EXPECT_DOUBLE_EQ(s.pixel_error->std, 1.0);
  EXPECT_EQ(s.pixel_error->count, 3);
  EXPECT_EQ(s.histogram.at(1).at(1), 3);
}

TEST(Summarize, AllRejected) {
  const EvalSummary s = summarize({record("a", Outcome::kRejected, 0),
                                   record("b", Outcome::kRejected, 0)});
  EXPECT_DOUBLE_EQ(s.accuracy, 0.0);
  EXPECT_EQ(s.rejected, 2);
  EXPECT_FALSE(s.pixel_error.has_value());
  EXPECT_EQ(s.histogram.at(1).at(kRejectedColumn), 2);
}

TEST(Summarize, SingleSampleAndMixedOutcomes) {
  const EvalSummary s = summarize({record("a", Outcome::kCorrect, 2.5),
                                   record("b", Outcome::kWrong, 40.0, 2),
                                   record("c", Outcome::kRejected, 0)});
  EXPECT_EQ(s.correct, 1);
  EXPECT_EQ(s.wrong, 1);
  EXPECT_EQ(s.rejected, 1);
  EXPECT_NEAR(s.accuracy, 1.0 / 3.0, 1e-15);
  ASSERT_TRUE(s.correct_pixel_error.has_value());
  EXPECT_TRUE(s.correct_pixel_error->single_sample);
  EXPECT_DOUBLE_EQ(s.correct_pixel_error->std, 0.0);
  EXPECT_EQ(s.pixel_error->count, 2);
  EXPECT_EQ(s.histogram.at(1).at(2), 1);
}

TEST(Summarize, EmptyInput) {
  EXPECT_EQ(expect_error([] { summarize({}); }).code(), ErrorCode::kEmptyInput);
  EXPECT_EQ(expect_error([] { error_stats({}); }).code(), ErrorCode::kEmptyInput);
}

TEST(Summarize, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 200; ++i) {
    const Outcome o = static_cast<Outcome>(i % 3);
    records.push_back(record("f" + std::to_string(i), o, u(rng), i % 4));
  }
  const EvalSummary base = summarize(records);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(records.begin(), records.end(), rng);
    EXPECT_EQ(summarize(records), base);
  }
}

TEST(SummaryDocuments, RoundTripAndTables) {
  const EvalSummary s = summarize({record("a", Outcome::kCorrect, 2.5),
                                   record("b", Outcome::kWrong, 40.0, 2),
                                   record("c", Outcome::kRejected, 0)});
  EXPECT_EQ(parse_summary(serialize_summary(s)), s);
  const std::string table = format_summary_table(s);
  EXPECT_NE(table.find("accuracy"), std::string::npos);
  const std::string svg = render_histogram_svg(s, "demo");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(DepthSweep, NoiseFreeCellsAreExact) {
  const auto cells = depth_sweep(default_pool_scene(), {2.0, 4.0}, {0.0}, 50, 11);
  ASSERT_EQ(cells.size(), 2u);
  for (const SweepCell& c : cells) {
    EXPECT_EQ(c.summary.count, 50);
    EXPECT_DOUBLE_EQ(c.summary.accuracy, 1.0);
    ASSERT_TRUE(c.summary.pixel_error.has_value());
    EXPECT_LT(c.summary.pixel_error->mean, 1e-6);
  }
  EXPECT_DOUBLE_EQ(cells[1].depth_m, 4.0);
  EXPECT_EQ(parse_sweep(serialize_sweep(cells)), cells);
  EXPECT_NE(format_sweep_table(cells).find("4.00"), std::string::npos);
}

TEST(DepthSweep, InvalidArguments) {
  EXPECT_EQ(expect_error([] { depth_sweep(default_pool_scene(), {2.0}, {0.0}, 0, 1); }).code(),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(expect_error([] { depth_sweep(default_pool_scene(), {}, {0.0}, 5, 1); }).code(),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace dip3d
