#include "facebench/metrics.hpp"

#include <algorithm>
#include <string_view>
#include <unordered_map>

#include "facebench/errors.hpp"

namespace facebench {

PrResult pr_from_counts(double iou_threshold, std::size_t tp, std::size_t fp, std::size_t fn) {
  PrResult r;
  r.iou_threshold = iou_threshold;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  return r;
}

PrResult precision_recall(std::span<const MatchOutcome> outcomes, std::optional<double> expected_threshold) {
  std::optional<double> threshold = expected_threshold;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& o : outcomes) {
    if (!threshold) threshold = o.threshold;
    if (o.threshold != *threshold) {
      throw MixedThresholdError("outcomes mix IOU thresholds " + std::to_string(*threshold) + " and " +
                                std::to_string(o.threshold));
    }
    tp += o.pairs.size();
    fp += o.false_positives.size();
    fn += o.false_negatives.size();
  }
  return pr_from_counts(threshold.value_or(0.0), tp, fp, fn);
}

RocCurve roc_curve(const DetectionCorpus& dets, const AnnotationCorpus& gts) {
  require_unique_frames(dets);
  require_unique_frames(gts);

  RocCurve curve;
  curve.iou_threshold = kRocIouThreshold;
  for (const auto& f : gts.frames) curve.total_ground_truth += f.ground_truth.size();
  if (curve.total_ground_truth == 0) throw EmptyGroundTruthError();

  std::unordered_map<std::string_view, const FrameDetections*> by_id;
  for (const auto& f : dets.frames) by_id.emplace(f.frame_id, &f);

  struct Event {
    double score;
    std::size_t frame;
  };
  std::vector<const FrameDetections*> det_of(gts.frames.size(), nullptr);
  std::vector<Event> events;
  for (std::size_t i = 0; i < gts.frames.size(); ++i) {
    const auto it = by_id.find(gts.frames[i].frame_id);
    if (it == by_id.end()) continue;
    det_of[i] = it->second;
    for (const auto& d : it->second->detections) events.push_back({d.score, i});
  }
  std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
    return l.score != r.score ? l.score > r.score : l.frame < r.frame;
  });

  // Lowering the cutoff only changes frames holding a detection at the new
  // cutoff; rematch those and update the running totals.
  std::vector<std::size_t> frame_tp(gts.frames.size(), 0);
  std::vector<std::size_t> frame_fp(gts.frames.size(), 0);
  std::size_t tp = 0, fp = 0;
  std::size_t e = 0;
  while (e < events.size()) {
    const double cutoff = events[e].score;
    std::size_t last_frame = static_cast<std::size_t>(-1);
    for (; e < events.size() && events[e].score == cutoff; ++e) {
      const std::size_t i = events[e].frame;
      if (i == last_frame) continue;
      last_frame = i;
      const MatchOutcome o = match_frame(det_of[i]->detections, gts.frames[i].ground_truth, kRocIouThreshold,
                                         MatchingMode::Strict, cutoff);
      tp = tp - frame_tp[i] + o.pairs.size();
      fp = fp - frame_fp[i] + o.false_positives.size();
      frame_tp[i] = o.pairs.size();
      frame_fp[i] = o.false_positives.size();
    }
    curve.points.push_back(
        {cutoff, fp, tp, static_cast<double>(tp) / static_cast<double>(curve.total_ground_truth)});
  }
  return curve;
}

std::vector<VideoPr> per_video_report(const std::map<std::string, std::vector<MatchOutcome>>& groups) {
  std::vector<VideoPr> rows;
  std::optional<double> threshold;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [video, outcomes] : groups) {
    const PrResult pr = precision_recall(outcomes);
    if (!outcomes.empty()) {
      if (threshold && *threshold != pr.iou_threshold) {
        throw MixedThresholdError("video '" + video + "' uses a different IOU threshold");
      }
      threshold = pr.iou_threshold;
    }
    tp += pr.tp;
    fp += pr.fp;
    fn += pr.fn;
    rows.push_back({video, pr});
  }
  if (threshold) {
    // Empty groups carry no threshold of their own.
    auto row = rows.begin();
    for (const auto& [video, outcomes] : groups) {
      if (outcomes.empty()) row->pr.iou_threshold = *threshold;
      ++row;
    }
  }
  rows.push_back({kPooledVideoId, pr_from_counts(threshold.value_or(0.0), tp, fp, fn)});
  return rows;
}

}  // namespace facebench
