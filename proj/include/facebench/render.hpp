#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facebench/adapter.hpp"
#include "facebench/formats.hpp"
#include "facebench/metrics.hpp"

namespace facebench {

struct ImageSize {
  int width;
  int height;

  bool operator==(const ImageSize&) const = default;
};

/// Reads pixel dimensions from a PNG, JPEG or GIF header without decoding
/// the image. nullopt for anything else or on I/O failure.
std::optional<ImageSize> probe_image_size(const std::filesystem::path& path);

/// One overlay: the referenced image with ground truth stroked red and
/// detections stroked green, each detection labelled with its score. When
/// the image size is unknown the canvas is sized to fit the boxes.
std::string render_overlay_svg(const std::string& frame_id, const std::string& image_href,
                               std::optional<ImageSize> size, std::span<const BoundingBox> ground_truth,
                               std::span<const Detection> detections);

/// Writes one SVG per manifest frame into out_dir and returns the number of
/// files written. Frames missing from a corpus simply get no boxes of that
/// kind. Throws OutputUnwritableError.
std::size_t render_overlays(const RunManifest& manifest, const AnnotationCorpus& gts, const DetectionCorpus& dets,
                            const std::filesystem::path& out_dir, unsigned workers = 1);

/// File name used for a frame's overlay ("<sanitized frame id>.svg").
std::string overlay_file_stem(const std::string& frame_id);

struct LabeledCurve {
  std::string label;
  RocCurve curve;
};

/// True-positive rate against total false positives, one polyline and legend
/// entry per curve in input order.
std::string render_roc_svg(std::span<const LabeledCurve> curves);

/// Throws std::invalid_argument on an empty curve list, OutputUnwritableError
/// when the file cannot be written.
void plot_roc(std::span<const LabeledCurve> curves, const std::filesystem::path& out_path);

}  // namespace facebench
