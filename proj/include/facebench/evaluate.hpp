#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facebench/formats.hpp"
#include "facebench/matching.hpp"
#include "facebench/metrics.hpp"

namespace facebench {

/// How frames are split into videos for per-video rows.
enum class VideoGrouping {
  /// Single pooled row.
  None,
  /// Video id is the frame id up to its last '/' ("." when there is none).
  Directory,
};

struct EvaluationConfig {
  std::vector<double> iou_thresholds{0.5, 0.75};
  std::optional<double> score_threshold;
  MatchingMode mode = MatchingMode::Strict;
  VideoGrouping grouping = VideoGrouping::None;
  unsigned workers = 1;

  /// Thresholds must be non-empty, in (0, 1] and strictly increasing.
  /// Throws ConfigError.
  void validate() const;
};

std::string video_of(const std::string& frame_id, VideoGrouping grouping);

struct ThresholdReport {
  double iou_threshold;
  /// Per-video rows (when grouping) followed by the pooled row.
  std::vector<VideoPr> rows;

  const PrResult& pooled() const { return rows.back().pr; }
};

struct EvaluationReport {
  EvaluationConfig config;
  std::string ground_truth_source;
  std::string detection_source;
  std::size_t annotated_frames = 0;
  std::size_t ground_truth_boxes = 0;
  std::size_t detections_in_annotated_frames = 0;
  MatchDiagnostics diagnostics;
  std::vector<ThresholdReport> thresholds;
};

EvaluationReport evaluate(const AnnotationCorpus& gts, const DetectionCorpus& dets, const EvaluationConfig& config);

/// Human-readable table laid out like a detector comparison table.
std::string format_report_table(const EvaluationReport& report);

/// "video_id,iou_threshold,tp,fp,fn,precision,recall" rows, threshold-major.
std::string format_report_csv(const EvaluationReport& report);

}  // namespace facebench
