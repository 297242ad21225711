#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "facebench/errors.hpp"
#include "facebench/evaluate.hpp"
#include "facebench/formats.hpp"
#include "temp_dir.hpp"

using namespace facebench;
using facebench::testing::read_text;

namespace {

const std::string kFixture = std::string(FACEBENCH_TEST_DATA) + "/fixture10/";

AnnotationCorpus fixture_gt() {
  std::ifstream in(kFixture + "gt.csv");
  return parse_csv_annotations(in);
}
DetectionCorpus fixture_det() {
  std::ifstream in(kFixture + "det.csv");
  return parse_csv_detections(in);
}

}  // namespace

TEST(Evaluate, FixtureGoldenReport) {
  const auto report = evaluate(fixture_gt(), fixture_det(), {});
  EXPECT_EQ(format_report_csv(report), read_text(kFixture + "expected_report.csv"));
  EXPECT_EQ(report.annotated_frames, 10u);
  EXPECT_EQ(report.ground_truth_boxes, 11u);
  EXPECT_EQ(report.detections_in_annotated_frames, 12u);
  EXPECT_EQ(report.diagnostics.unannotated_frames, std::vector<std::string>{"videoC/f11"});
  EXPECT_EQ(report.diagnostics.unannotated_detections, 1u);
  EXPECT_EQ(report.diagnostics.frames_without_detection_entry, 1u);
  ASSERT_EQ(report.thresholds.size(), 2u);
  EXPECT_NEAR(report.thresholds[0].pooled().precision, 7.0 / 12.0, 1e-12);
  EXPECT_NEAR(report.thresholds[0].pooled().recall, 7.0 / 11.0, 1e-12);
  EXPECT_NEAR(report.thresholds[1].pooled().precision, 5.0 / 12.0, 1e-12);
  EXPECT_NEAR(report.thresholds[1].pooled().recall, 5.0 / 11.0, 1e-12);
}

TEST(Evaluate, FixtureGoldenReportByVideo) {
  EvaluationConfig cfg;
  cfg.grouping = VideoGrouping::Directory;
  const auto report = evaluate(fixture_gt(), fixture_det(), cfg);
  EXPECT_EQ(format_report_csv(report), read_text(kFixture + "expected_report_by_video.csv"));
  const auto& rows = report.thresholds[0].rows;
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].pr.tp + rows[1].pr.tp, rows[2].pr.tp);
  EXPECT_EQ(rows[0].pr.fp + rows[1].pr.fp, rows[2].pr.fp);
  EXPECT_EQ(rows[0].pr.fn + rows[1].pr.fn, rows[2].pr.fn);
}

TEST(Evaluate, WorkerCountDoesNotChangeOutput) {
  EvaluationConfig one;
  one.grouping = VideoGrouping::Directory;
  EvaluationConfig four = one;
  four.workers = 4;
  const auto a = evaluate(fixture_gt(), fixture_det(), one);
  const auto b = evaluate(fixture_gt(), fixture_det(), four);
  EXPECT_EQ(format_report_csv(a), format_report_csv(b));
}

TEST(Evaluate, PerfectDetections) {
  const auto gts = fixture_gt();
  DetectionCorpus dets;
  for (const auto& f : gts.frames) {
    FrameDetections fd{f.frame_id, {}};
    for (const auto& b : f.ground_truth) fd.detections.emplace_back(b, 1.0);
    dets.frames.push_back(fd);
  }
  for (const auto& tr : evaluate(gts, dets, {}).thresholds) {
    EXPECT_EQ(tr.pooled().precision, 1.0);
    EXPECT_EQ(tr.pooled().recall, 1.0);
  }
}

TEST(Evaluate, EmptyDetections) {
  for (const auto& tr : evaluate(fixture_gt(), DetectionCorpus{}, {}).thresholds) {
    EXPECT_EQ(tr.pooled().precision, 1.0);
    EXPECT_EQ(tr.pooled().recall, 0.0);
  }
}

TEST(Evaluate, ScoreThresholdAndMode) {
  EvaluationConfig cfg;
  cfg.iou_thresholds = {0.5};
  cfg.score_threshold = 0.5;
  const auto cut = evaluate(fixture_gt(), fixture_det(), cfg).thresholds[0].pooled();
  // Drops the 0.4, 0.3 and 0.2 false positives; 0.5 itself is kept.
  EXPECT_EQ(cut.tp, 7u);
  EXPECT_EQ(cut.fp, 2u);

  cfg.score_threshold.reset();
  cfg.mode = MatchingMode::BestOverlap;
  const auto best = evaluate(fixture_gt(), fixture_det(), cfg).thresholds[0].pooled();
  // One scored detection per frame with detections: f08 keeps only one of its pairs.
  EXPECT_EQ(best.tp, 6u);
  EXPECT_EQ(best.fp, 2u);
  EXPECT_EQ(best.fn, 5u);
}

TEST(EvaluationConfig, Validation) {
  EvaluationConfig cfg;
  cfg.iou_thresholds = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.iou_thresholds = {0.75, 0.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.iou_thresholds = {0.5, 0.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.iou_thresholds = {0.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.iou_thresholds = {1.0};
  EXPECT_NO_THROW(cfg.validate());
}

TEST(VideoOf, Grouping) {
  EXPECT_EQ(video_of("a/b/c.png", VideoGrouping::Directory), "a/b");
  EXPECT_EQ(video_of("c.png", VideoGrouping::Directory), ".");
  EXPECT_EQ(video_of("a/b", VideoGrouping::None), "all");
}

TEST(FormatReportTable, ContainsCountsAndConfiguration) {
  auto gts = fixture_gt();
  gts.source_path = "gt.csv";
  const auto table = format_report_table(evaluate(gts, fixture_det(), {}));
  EXPECT_NE(table.find("gt.csv (10 frames, 11 boxes)"), std::string::npos) << table;
  EXPECT_NE(table.find("strict, score threshold none"), std::string::npos);
  EXPECT_NE(table.find("1 unannotated frames (1 detections)"), std::string::npos);
  EXPECT_NE(table.find("all     0.50         7         5         4   0.6364     0.5833"), std::string::npos) << table;
  EXPECT_NE(table.find("all     0.75         5         7         6   0.4545     0.4167"), std::string::npos) << table;
}
