#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "facebench/adapter.hpp"
#include "facebench/errors.hpp"
#include "facebench/evaluate.hpp"
#include "facebench/formats.hpp"
#include "facebench/ingest.hpp"
#include "facebench/metrics.hpp"
#include "facebench/render.hpp"

namespace facebench::cli {

namespace fs = std::filesystem;

namespace {

/// Validation failure that should exit with code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputUnwritableError("cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw OutputUnwritableError("failed writing '" + path + "'");
}

/// Re-raises a parse error with the file name attached.
class FileParseError : public Error {
 public:
  FileParseError(const std::string& path, const ParseError& e) : Error(path + ":" + std::to_string(e.line()) + ": " + e.what()) {}
};

AnnotationCorpus load_annotations(const std::string& path, const std::string& format) {
  const std::string text = read_input(path);
  std::istringstream in(text);
  AnnotationCorpus corpus;
  try {
    const bool csv = format == "csv" || (format == "auto" && looks_like_csv(text));
    corpus = csv ? parse_csv_annotations(in) : parse_fddb_annotations(in);
  } catch (const ParseError& e) {
    throw FileParseError(path, e);
  }
  corpus.source_path = path;
  return corpus;
}

DetectionCorpus load_detections(const std::string& path, const std::string& format) {
  const std::string text = read_input(path);
  std::istringstream in(text);
  DetectionCorpus corpus;
  try {
    const bool csv = format == "csv" || (format == "auto" && looks_like_csv(text));
    corpus = csv ? parse_csv_detections(in) : parse_fddb_detections(in);
  } catch (const ParseError& e) {
    throw FileParseError(path, e);
  }
  corpus.source_path = path;
  return corpus;
}

RunManifest read_manifest_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("manifest '" + path + "' does not exist");
  try {
    return load_manifest(path);
  } catch (const ParseError& e) {
    throw FileParseError(path, e);
  }
}

std::string pr_line(const ThresholdReport& tr) {
  const PrResult& pr = tr.pooled();
  std::ostringstream line;
  line << "IOU " << format_real(tr.iou_threshold) << ": precision " << format_real(pr.precision) << " recall "
       << format_real(pr.recall) << " (tp " << pr.tp << ", fp " << pr.fp << ", fn " << pr.fn << ")";
  return line.str();
}

// --- subcommands -------------------------------------------------------------

struct DetectArgs {
  std::string adapter;
  std::string manifest;
  std::string out;
  std::string cache;
  bool no_cache = false;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(a.adapter)) throw UsageError("adapter config '" + a.adapter + "' does not exist");
  const AdapterConfig config = load_adapter_config(a.adapter);
  const RunManifest manifest = read_manifest_file(a.manifest);
  if (manifest.frames.empty()) throw UsageError("manifest '" + a.manifest + "' lists no frames");

  AdapterRunOptions options;
  options.cache_dir = a.cache;
  options.use_cache = !a.no_cache;
  const AdapterRun run = run_adapter(config, manifest, options);

  if (!run.missing_frames.empty()) {
    err << "warning: adapter '" << config.name << "' reported nothing for " << run.missing_frames.size()
        << " frame(s), treated as zero detections:";
    for (const auto& id : run.missing_frames) err << ' ' << id;
    err << '\n';
  }
  if (!run.unexpected_frames.empty()) {
    err << "warning: adapter '" << config.name << "' reported " << run.unexpected_frames.size()
        << " frame(s) not in the manifest; dropped\n";
  }
  write_output(a.out, write_detections(run.detections, DetectionFormat::Csv));

  std::size_t detections = 0;
  for (const auto& f : run.detections.frames) detections += f.detections.size();
  out << "detect: adapter " << config.name << ", " << run.detections.frames.size() << " frames, " << detections
      << " detections" << (run.from_cache ? " (cached)" : "") << '\n';
  return kSuccess;
}

struct EvaluateArgs {
  std::string gt;
  std::string det;
  std::string gt_format = "auto";
  std::string det_format = "auto";
  std::vector<double> iou{0.5, 0.75};
  std::optional<double> score_threshold;
  std::string mode = "strict";
  std::string group_by = "none";
  std::string out;
  unsigned workers = 1;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  EvaluationConfig cfg;
  cfg.iou_thresholds = a.iou;
  cfg.score_threshold = a.score_threshold;
  cfg.mode = *parse_matching_mode(a.mode);
  cfg.grouping = a.group_by == "dir" ? VideoGrouping::Directory : VideoGrouping::None;
  cfg.workers = a.workers;
  cfg.validate();

  const AnnotationCorpus gts = load_annotations(a.gt, a.gt_format);
  const DetectionCorpus dets = load_detections(a.det, a.det_format);
  const EvaluationReport report = evaluate(gts, dets, cfg);

  write_output(a.out + ".txt", format_report_table(report));
  write_output(a.out + ".csv", format_report_csv(report));
  for (const auto& tr : report.thresholds) out << pr_line(tr) << '\n';
  return kSuccess;
}

struct RocArgs {
  std::string gt;
  std::string gt_format = "auto";
  std::vector<std::string> dets;
  std::vector<std::string> labels;
  std::string det_format = "auto";
  std::string out;
  std::string csv;
};

int cmd_roc(const RocArgs& a, std::ostream& out, std::ostream&) {
  if (!a.labels.empty() && a.labels.size() != a.dets.size()) {
    throw UsageError("give one --label per --det (" + std::to_string(a.dets.size()) + " detection files, " +
                     std::to_string(a.labels.size()) + " labels)");
  }
  const AnnotationCorpus gts = load_annotations(a.gt, a.gt_format);
  std::vector<LabeledCurve> curves;
  for (std::size_t i = 0; i < a.dets.size(); ++i) {
    const DetectionCorpus dets = load_detections(a.dets[i], a.det_format);
    const std::string label = a.labels.empty() ? fs::path(a.dets[i]).stem().string() : a.labels[i];
    curves.push_back({label, roc_curve(dets, gts)});
  }
  plot_roc(curves, a.out);
  if (!a.csv.empty()) {
    std::ostringstream csv;
    csv << "label,score_threshold,false_positives,true_positive_rate\n";
    for (const auto& c : curves) {
      for (const auto& p : c.curve.points) {
        csv << csv_field(c.label) << ',' << format_real(p.score_threshold) << ',' << p.false_positives << ','
            << format_real(p.true_positive_rate) << '\n';
      }
    }
    write_output(a.csv, csv.str());
  }
  for (const auto& c : curves) {
    const auto& pts = c.curve.points;
    out << "roc: " << c.label << ", " << pts.size() << " points";
    if (!pts.empty()) {
      out << ", final tpr " << format_real(pts.back().true_positive_rate) << " at " << pts.back().false_positives
          << " false positives";
    }
    out << '\n';
  }
  return kSuccess;
}

struct OverlayArgs {
  std::string manifest;
  std::string gt;
  std::string det;
  std::string gt_format = "auto";
  std::string det_format = "auto";
  std::string out_dir;
  unsigned workers = 1;
};

int cmd_overlay(const OverlayArgs& a, std::ostream& out, std::ostream&) {
  const RunManifest manifest = read_manifest_file(a.manifest);
  const AnnotationCorpus gts = a.gt.empty() ? AnnotationCorpus{} : load_annotations(a.gt, a.gt_format);
  const DetectionCorpus dets = a.det.empty() ? DetectionCorpus{} : load_detections(a.det, a.det_format);
  const std::size_t written = render_overlays(manifest, gts, dets, a.out_dir, a.workers);
  out << "overlay: " << written << " files written to " << a.out_dir << '\n';
  return kSuccess;
}

struct ConvertArgs {
  std::string in;
  std::string from;
  std::string to;
  std::string out;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out, std::ostream&) {
  std::string result;
  bool lossy = false;
  if (a.from == "fddb-ann" && a.to == "csv") {
    result = write_csv_annotations(load_annotations(a.in, "fddb-ann"));
    lossy = true;
  } else if (a.from == "fddb-det" && (a.to == "csv" || a.to == "fddb-det")) {
    result = write_detections(load_detections(a.in, "fddb-det"),
                              a.to == "csv" ? DetectionFormat::Csv : DetectionFormat::Fddb);
  } else if (a.from == "csv" && (a.to == "csv" || a.to == "fddb-det")) {
    const std::string text = read_input(a.in);
    std::istringstream first(text);
    std::string header;
    while (std::getline(first, header) && header.find_first_not_of(" \t\r") == std::string::npos) {
    }
    const bool annotations = header.rfind(kCsvAnnotationHeader, 0) == 0 && header.find("score") == std::string::npos;
    if (annotations && a.to == "fddb-det") {
      throw UsageError("unsupported conversion: csv annotations -> fddb-det (annotations carry no scores)");
    }
    result = annotations ? write_csv_annotations(load_annotations(a.in, "csv"))
                         : write_detections(load_detections(a.in, "csv"),
                                            a.to == "csv" ? DetectionFormat::Csv : DetectionFormat::Fddb);
  } else {
    throw UsageError("unsupported conversion: " + a.from + " -> " + a.to);
  }
  write_output(a.out, result);
  out << "convert: " << a.from << " -> " << a.to << " written to " << a.out
      << (lossy ? " (lossy: ellipses replaced by their bounding boxes)" : "") << '\n';
  return kSuccess;
}

struct IngestArgs {
  std::string video;
  std::string extractor;
  std::string frames_dir;
  std::string images;
  std::optional<double> fps;
  bool reuse = false;
  long long timeout = 0;
  std::string out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream&) {
  RunManifest manifest;
  if (!a.images.empty()) {
    if (!a.video.empty()) throw UsageError("--images and --video are mutually exclusive");
    manifest = scan_image_directory(a.images);
  } else {
    if (a.video.empty() || a.extractor.empty() || a.frames_dir.empty()) {
      throw UsageError("video ingestion needs --video, --extractor and --frames-dir (or use --images)");
    }
    IngestOptions options;
    options.video_path = a.video;
    options.extractor_command = a.extractor;
    options.output_dir = a.frames_dir;
    options.fps = a.fps;
    options.reuse = a.reuse;
    options.timeout = std::chrono::seconds(a.timeout);
    manifest = ingest_frames(options);
  }

  // Paths are stored relative to the manifest file's own directory.
  const fs::path base = fs::absolute(fs::path(a.out)).parent_path().lexically_normal();
  RunManifest relocated;
  relocated.corpus_root = base;
  for (const auto& entry : manifest.frames) {
    const fs::path abs = fs::absolute(manifest.resolve(entry)).lexically_normal();
    const fs::path rel = abs.lexically_relative(base);
    relocated.frames.push_back({entry.frame_id, (rel.empty() ? abs : rel).generic_string()});
  }
  write_output(a.out, format_manifest(relocated));
  out << "ingest: " << relocated.frames.size() << " frames listed in " << a.out << '\n';
  return kSuccess;
}

void add_workers(CLI::App* cmd, unsigned& workers) {
  cmd->add_option("--workers", workers, "Worker threads for per-frame work")->check(CLI::Range(1u, 1024u));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"facebench: face detection benchmarking harness"};
  app.name(args.empty() ? "facebench" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.set_version_flag("--version", "facebench 0.1.0");

  DetectArgs detect;
  auto* c_detect = app.add_subcommand("detect", "Run a detector adapter over a manifest");
  c_detect->add_option("--adapter", detect.adapter, "Adapter config file (key=value lines)")->required();
  c_detect->add_option("--manifest", detect.manifest, "Manifest file (frame_id<TAB>image_path)")->required();
  c_detect->add_option("--out", detect.out, "Output detection CSV")->required();
  c_detect->add_option("--cache", detect.cache, "Cache directory (omit to disable caching)");
  c_detect->add_flag("--no-cache", detect.no_cache, "Ignore cached results and re-run the adapter");

  EvaluateArgs evaluate_args;
  auto* c_eval = app.add_subcommand("evaluate", "Precision/recall at one or more IOU thresholds");
  c_eval->add_option("--gt", evaluate_args.gt, "Ground-truth file (CSV or FDDB ellipses)")->required();
  c_eval->add_option("--det", evaluate_args.det, "Detection file (CSV or FDDB rectangles)")->required();
  c_eval->add_option("--gt-format", evaluate_args.gt_format, "auto, csv or fddb-ann")
      ->check(CLI::IsMember({"auto", "csv", "fddb-ann"}));
  c_eval->add_option("--det-format", evaluate_args.det_format, "auto, csv or fddb-det")
      ->check(CLI::IsMember({"auto", "csv", "fddb-det"}));
  c_eval->add_option("--iou", evaluate_args.iou, "Comma-separated IOU thresholds")
      ->delimiter(',')
      ->capture_default_str();
  c_eval->add_option("--score-threshold", evaluate_args.score_threshold,
                     "Drop detections scoring below this before matching");
  c_eval->add_option("--mode", evaluate_args.mode, "strict or best-overlap")
      ->check(CLI::IsMember({"strict", "best-overlap"}))
      ->capture_default_str();
  c_eval->add_option("--group-by", evaluate_args.group_by,
                     "none, or dir to report each frame_id directory as its own video")
      ->check(CLI::IsMember({"none", "dir"}))
      ->capture_default_str();
  c_eval->add_option("--out", evaluate_args.out, "Report prefix; writes <prefix>.txt and <prefix>.csv")->required();
  add_workers(c_eval, evaluate_args.workers);

  RocArgs roc;
  auto* c_roc = app.add_subcommand("roc", "Discrete-score ROC curves (IOU 0.5) for one or more detectors");
  c_roc->add_option("--gt", roc.gt, "Ground-truth file")->required();
  c_roc->add_option("--gt-format", roc.gt_format, "auto, csv or fddb-ann")
      ->check(CLI::IsMember({"auto", "csv", "fddb-ann"}));
  c_roc->add_option("--det", roc.dets, "Detection file; repeat for several detectors")->required();
  c_roc->add_option("--label", roc.labels, "Curve label; one per --det, in the same order");
  c_roc->add_option("--det-format", roc.det_format, "auto, csv or fddb-det")
      ->check(CLI::IsMember({"auto", "csv", "fddb-det"}));
  c_roc->add_option("--out", roc.out, "Output SVG plot")->required();
  c_roc->add_option("--csv", roc.csv, "Also write label,score_threshold,false_positives,true_positive_rate rows");

  OverlayArgs overlay;
  auto* c_overlay = app.add_subcommand("overlay", "Render per-frame SVG overlays (ground truth red, detections green)");
  c_overlay->add_option("--manifest", overlay.manifest, "Manifest file")->required();
  c_overlay->add_option("--gt", overlay.gt, "Ground-truth file");
  c_overlay->add_option("--det", overlay.det, "Detection file");
  c_overlay->add_option("--gt-format", overlay.gt_format, "auto, csv or fddb-ann")
      ->check(CLI::IsMember({"auto", "csv", "fddb-ann"}));
  c_overlay->add_option("--det-format", overlay.det_format, "auto, csv or fddb-det")
      ->check(CLI::IsMember({"auto", "csv", "fddb-det"}));
  c_overlay->add_option("--out-dir", overlay.out_dir, "Directory for the SVG files")->required();
  add_workers(c_overlay, overlay.workers);

  ConvertArgs convert;
  auto* c_convert = app.add_subcommand("convert", "Convert between annotation/detection formats");
  c_convert->add_option("--in", convert.in, "Input file")->required();
  c_convert->add_option("--from", convert.from, "fddb-ann, fddb-det or csv")->required();
  c_convert->add_option("--to", convert.to, "csv or fddb-det")->required();
  c_convert->add_option("--out", convert.out, "Output file")->required();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Build a manifest from a video (via an extractor) or an image directory");
  c_ingest->add_option("--video", ingest.video, "Video file");
  c_ingest->add_option("--extractor", ingest.extractor,
                       "Extractor command with {input}, {outdir}, {pattern} and optionally {fps}, e.g. "
                       "\"ffmpeg -i {input} {outdir}/{pattern}.png\"");
  c_ingest->add_option("--frames-dir", ingest.frames_dir, "Directory receiving extracted frames");
  c_ingest->add_option("--fps", ingest.fps, "Frame rate passed to the extractor as {fps}");
  c_ingest->add_flag("--reuse", ingest.reuse, "Reuse frames already present in --frames-dir");
  c_ingest->add_option("--timeout", ingest.timeout, "Extractor timeout in seconds (0 = none)");
  c_ingest->add_option("--images", ingest.images, "Image directory to list instead of a video");
  c_ingest->add_option("--out", ingest.out, "Manifest file to write")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    if (*c_detect) return cmd_detect(detect, out, err);
    if (*c_eval) return cmd_evaluate(evaluate_args, out, err);
    if (*c_roc) return cmd_roc(roc, out, err);
    if (*c_overlay) return cmd_overlay(overlay, out, err);
    if (*c_convert) return cmd_convert(convert, out, err);
    if (*c_ingest) return cmd_ingest(ingest, out, err);
  } catch (const ProcessFailure& e) {
    err << "error: " << e.what() << '\n';
    if (!e.diagnostics().empty()) err << "--- captured stderr ---\n" << e.diagnostics() << "\n--- end ---\n";
    return kRuntimeFailure;
  } catch (const AdapterOutputMalformed& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const OutputUnwritableError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const NoFramesProduced& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const Error& e) {
    // Configuration, parse, geometry and other input problems.
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kValidationError;
}

}  // namespace facebench::cli
