#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facebench/formats.hpp"
#include "facebench/geometry.hpp"

namespace facebench {

enum class MatchingMode {
  /// Every detection is scored; anything unmatched is a false positive.
  Strict,
  /// Only the detection with the highest IOU against any ground truth is
  /// scored; the others are ignored. For sensitivity analysis when frames
  /// contain real but unannotated faces.
  BestOverlap,
};

const char* to_string(MatchingMode mode);
std::optional<MatchingMode> parse_matching_mode(std::string_view text);

struct MatchPair {
  std::size_t detection;
  std::size_t ground_truth;
  double iou;

  bool operator==(const MatchPair&) const = default;
};

/// Assignment of one frame's detections to its ground truth. Indices refer
/// to the input lists. Every detection index appears exactly once in
/// pairs, false_positives or ignored; every ground-truth index exactly once
/// in pairs or false_negatives. `ignored` holds detections below the score
/// cutoff and, in best-overlap mode, the non-selected detections.
struct MatchOutcome {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;
  std::vector<std::size_t> ignored;
  double threshold = 0.5;

  bool operator==(const MatchOutcome&) const = default;
};

struct MatchOptions {
  double iou_threshold = 0.5;
  /// Detections scoring strictly below this are dropped before matching.
  std::optional<double> score_threshold;
  MatchingMode mode = MatchingMode::Strict;
  unsigned workers = 1;
};

/// Greedy matching: detections in descending score order (ties by index),
/// each claiming the unmatched ground truth of highest IOU (ties by index)
/// if that IOU reaches the threshold. Throws std::invalid_argument unless
/// 0 < iou_threshold <= 1.
MatchOutcome match_frame(std::span<const Detection> dets, std::span<const BoundingBox> gts, double iou_threshold,
                         MatchingMode mode = MatchingMode::Strict,
                         std::optional<double> score_threshold = std::nullopt);

struct FrameOutcome {
  std::string frame_id;
  MatchOutcome outcome;
};

struct MatchDiagnostics {
  /// Detection frames with no annotation entry; excluded from scoring.
  std::vector<std::string> unannotated_frames;
  std::size_t unannotated_detections = 0;
  /// Annotated frames the detector did not report at all.
  std::size_t frames_without_detection_entry = 0;

  bool operator==(const MatchDiagnostics&) const = default;
};

struct CorpusMatch {
  /// One entry per annotated frame, in annotation corpus order.
  std::vector<FrameOutcome> frames;
  MatchDiagnostics diagnostics;

  std::vector<MatchOutcome> outcomes() const;
};

/// Matches every annotated frame. Throws DuplicateFrameError if either
/// corpus repeats a frame id.
CorpusMatch match_corpus(const DetectionCorpus& dets, const AnnotationCorpus& gts, const MatchOptions& options);

}  // namespace facebench
