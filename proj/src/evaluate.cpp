#include "facebench/evaluate.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "facebench/errors.hpp"

namespace facebench {

void EvaluationConfig::validate() const {
  if (iou_thresholds.empty()) throw ConfigError("at least one IOU threshold is required");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IOU thresholds must lie in (0, 1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) throw ConfigError("IOU thresholds must be strictly increasing");
  }
  if (score_threshold && !std::isfinite(*score_threshold)) throw ConfigError("score threshold must be finite");
}

std::string video_of(const std::string& frame_id, VideoGrouping grouping) {
  if (grouping == VideoGrouping::None) return kPooledVideoId;
  const std::size_t slash = frame_id.rfind('/');
  return slash == std::string::npos ? std::string(".") : frame_id.substr(0, slash);
}

EvaluationReport evaluate(const AnnotationCorpus& gts, const DetectionCorpus& dets, const EvaluationConfig& config) {
  config.validate();
  EvaluationReport report;
  report.config = config;
  report.ground_truth_source = gts.source_path;
  report.detection_source = dets.source_path;
  report.annotated_frames = gts.frames.size();
  for (const auto& f : gts.frames) report.ground_truth_boxes += f.ground_truth.size();

  for (const double threshold : config.iou_thresholds) {
    MatchOptions options;
    options.iou_threshold = threshold;
    options.score_threshold = config.score_threshold;
    options.mode = config.mode;
    options.workers = config.workers;
    const CorpusMatch match = match_corpus(dets, gts, options);
    report.diagnostics = match.diagnostics;

    std::map<std::string, std::vector<MatchOutcome>> groups;
    for (const auto& f : match.frames) groups[video_of(f.frame_id, config.grouping)].push_back(f.outcome);

    ThresholdReport tr{threshold, {}};
    if (config.grouping == VideoGrouping::None) {
      std::vector<MatchOutcome> all = match.outcomes();
      tr.rows.push_back({kPooledVideoId, precision_recall(all, threshold)});
    } else {
      tr.rows = per_video_report(groups);
      tr.rows.back().pr.iou_threshold = threshold;
    }
    report.thresholds.push_back(std::move(tr));
  }

  std::map<std::string_view, const FrameDetections*> by_id;
  for (const auto& f : dets.frames) by_id.emplace(f.frame_id, &f);
  for (const auto& f : gts.frames) {
    const auto it = by_id.find(f.frame_id);
    if (it != by_id.end()) report.detections_in_annotated_frames += it->second->detections.size();
  }
  return report;
}

namespace {

std::string fixed(double v, int precision) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("?");
}

std::string pad(std::string s, std::size_t width, bool right_align) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right_align ? fill + s : s + fill;
}

}  // namespace

std::string format_report_table(const EvaluationReport& report) {
  std::ostringstream out;
  const auto& cfg = report.config;
  out << "Face detection evaluation\n";
  out << "  ground truth : " << (report.ground_truth_source.empty() ? "-" : report.ground_truth_source) << " ("
      << report.annotated_frames << " frames, " << report.ground_truth_boxes << " boxes)\n";
  out << "  detections   : " << (report.detection_source.empty() ? "-" : report.detection_source) << " ("
      << report.detections_in_annotated_frames << " in annotated frames)\n";
  out << "  matching     : " << to_string(cfg.mode) << ", score threshold "
      << (cfg.score_threshold ? format_real(*cfg.score_threshold) : std::string("none")) << "\n";
  out << "  excluded     : " << report.diagnostics.unannotated_frames.size() << " unannotated frames ("
      << report.diagnostics.unannotated_detections << " detections)\n";
  out << "  no output for: " << report.diagnostics.frames_without_detection_entry << " annotated frames\n\n";

  std::size_t video_width = 5;
  for (const auto& tr : report.thresholds) {
    for (const auto& row : tr.rows) video_width = std::max(video_width, row.video_id.size());
  }
  out << pad("video", video_width, false) << "  " << pad("IOU", 5, true) << "  " << pad("TP", 8, true) << "  "
      << pad("FP", 8, true) << "  " << pad("FN", 8, true) << "  " << pad("Recall", 7, true) << "  "
      << pad("Precision", 9, true) << "\n";
  for (const auto& tr : report.thresholds) {
    for (const auto& row : tr.rows) {
      out << pad(row.video_id, video_width, false) << "  " << pad(fixed(tr.iou_threshold, 2), 5, true) << "  "
          << pad(std::to_string(row.pr.tp), 8, true) << "  " << pad(std::to_string(row.pr.fp), 8, true) << "  "
          << pad(std::to_string(row.pr.fn), 8, true) << "  " << pad(fixed(row.pr.recall, 4), 7, true) << "  "
          << pad(fixed(row.pr.precision, 4), 9, true) << "\n";
    }
  }
  return out.str();
}

std::string format_report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "video_id,iou_threshold,tp,fp,fn,precision,recall\n";
  for (const auto& tr : report.thresholds) {
    for (const auto& row : tr.rows) {
      out << csv_field(row.video_id) << ',' << format_real(tr.iou_threshold) << ',' << row.pr.tp << ',' << row.pr.fp << ','
          << row.pr.fn << ',' << format_real(row.pr.precision) << ',' << format_real(row.pr.recall) << '\n';
    }
  }
  return out.str();
}

}  // namespace facebench
