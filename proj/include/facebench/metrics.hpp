#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facebench/formats.hpp"
#include "facebench/matching.hpp"

namespace facebench {

/// Counts and ratios at one IOU threshold. Empty denominators are defined
/// as 1.0: no detections gives precision 1, no ground truth gives recall 1.
struct PrResult {
  double iou_threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;

  bool operator==(const PrResult&) const = default;
};

PrResult pr_from_counts(double iou_threshold, std::size_t tp, std::size_t fp, std::size_t fn);

/// Sums the outcomes' counts. All outcomes must share one threshold (and
/// equal `expected_threshold` when given), else MixedThresholdError.
PrResult precision_recall(std::span<const MatchOutcome> outcomes,
                          std::optional<double> expected_threshold = std::nullopt);

struct RocPoint {
  double score_threshold;
  std::size_t false_positives;
  std::size_t true_positives;
  double true_positive_rate;

  bool operator==(const RocPoint&) const = default;
};

/// Discrete-score ROC: one point per distinct detection score, in
/// decreasing score order. x is the absolute false-positive count.
struct RocCurve {
  std::vector<RocPoint> points;
  double iou_threshold = 0.5;
  std::size_t total_ground_truth = 0;

  bool operator==(const RocCurve&) const = default;
};

inline constexpr double kRocIouThreshold = 0.5;

/// Sweeps the score cutoff over every distinct score of detections in
/// annotated frames, matching strictly at IOU 0.5. Throws
/// EmptyGroundTruthError when the annotations hold no box.
RocCurve roc_curve(const DetectionCorpus& dets, const AnnotationCorpus& gts);

struct VideoPr {
  std::string video_id;
  PrResult pr;

  bool operator==(const VideoPr&) const = default;
};

inline constexpr const char* kPooledVideoId = "all";

/// One row per group in key order, followed by a pooled row (id "all")
/// built from the summed counts.
std::vector<VideoPr> per_video_report(const std::map<std::string, std::vector<MatchOutcome>>& groups);

}  // namespace facebench
