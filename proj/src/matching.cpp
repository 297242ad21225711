#include "facebench/matching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "facebench/parallel.hpp"

namespace facebench {

const char* to_string(MatchingMode mode) {
  return mode == MatchingMode::Strict ? "strict" : "best-overlap";
}

std::optional<MatchingMode> parse_matching_mode(std::string_view text) {
  if (text == "strict") return MatchingMode::Strict;
  if (text == "best-overlap") return MatchingMode::BestOverlap;
  return std::nullopt;
}

namespace {

struct BestGt {
  std::size_t index = 0;
  double iou = -1.0;
};

BestGt best_ground_truth(const BoundingBox& box, std::span<const BoundingBox> gts, const std::vector<bool>& taken) {
  BestGt best;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (taken[g]) continue;
    const double v = iou(box, gts[g]);
    if (v > best.iou) best = {g, v};
  }
  return best;
}

}  // namespace

MatchOutcome match_frame(std::span<const Detection> dets, std::span<const BoundingBox> gts, double iou_threshold,
                         MatchingMode mode, std::optional<double> score_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("match_frame: iou_threshold must lie in (0, 1]");
  }
  MatchOutcome out;
  out.threshold = iou_threshold;

  std::vector<std::size_t> order;
  order.reserve(dets.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (score_threshold && dets[d].score < *score_threshold) {
      out.ignored.push_back(d);
    } else {
      order.push_back(d);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return dets[l].score > dets[r].score; });

  std::vector<bool> taken(gts.size(), false);

  if (mode == MatchingMode::BestOverlap && !order.empty()) {
    // Score order is preserved in `order`, so a strict > keeps the
    // higher-scored (then lower-indexed) detection on IOU ties.
    std::size_t chosen = order.front();
    BestGt chosen_gt = best_ground_truth(dets[chosen].box, gts, taken);
    for (std::size_t k = 1; k < order.size(); ++k) {
      const BestGt cand = best_ground_truth(dets[order[k]].box, gts, taken);
      if (cand.iou > chosen_gt.iou) {
        chosen = order[k];
        chosen_gt = cand;
      }
    }
    for (std::size_t d : order) {
      if (d != chosen) out.ignored.push_back(d);
    }
    order.assign(1, chosen);
  }

  for (std::size_t d : order) {
    const BestGt best = best_ground_truth(dets[d].box, gts, taken);
    if (best.iou >= iou_threshold) {
      taken[best.index] = true;
      out.pairs.push_back({d, best.index, best.iou});
    } else {
      out.false_positives.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!taken[g]) out.false_negatives.push_back(g);
  }
  std::sort(out.false_positives.begin(), out.false_positives.end());
  std::sort(out.ignored.begin(), out.ignored.end());
  return out;
}

std::vector<MatchOutcome> CorpusMatch::outcomes() const {
  std::vector<MatchOutcome> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.outcome);
  return out;
}

CorpusMatch match_corpus(const DetectionCorpus& dets, const AnnotationCorpus& gts, const MatchOptions& options) {
  require_unique_frames(dets);
  require_unique_frames(gts);

  std::unordered_map<std::string_view, const FrameDetections*> by_id;
  by_id.reserve(dets.frames.size());
  for (const auto& f : dets.frames) by_id.emplace(f.frame_id, &f);

  CorpusMatch result;
  result.frames.resize(gts.frames.size());
  std::vector<const FrameDetections*> det_of(gts.frames.size(), nullptr);
  std::unordered_map<std::string_view, bool> annotated;
  annotated.reserve(gts.frames.size());
  for (std::size_t i = 0; i < gts.frames.size(); ++i) {
    annotated.emplace(gts.frames[i].frame_id, true);
    const auto it = by_id.find(gts.frames[i].frame_id);
    if (it != by_id.end()) {
      det_of[i] = it->second;
    } else {
      ++result.diagnostics.frames_without_detection_entry;
    }
  }
  for (const auto& f : dets.frames) {
    if (!annotated.contains(f.frame_id)) {
      result.diagnostics.unannotated_frames.push_back(f.frame_id);
      result.diagnostics.unannotated_detections += f.detections.size();
    }
  }

  parallel_for(gts.frames.size(), options.workers, [&](std::size_t i) {
    const FrameAnnotation& frame = gts.frames[i];
    const std::span<const Detection> frame_dets =
        det_of[i] ? std::span<const Detection>(det_of[i]->detections) : std::span<const Detection>();
    result.frames[i].frame_id = frame.frame_id;
    result.frames[i].outcome = match_frame(frame_dets, frame.ground_truth, options.iou_threshold, options.mode,
                                           options.score_threshold);
  });
  return result;
}

}  // namespace facebench
