#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "facebench/adapter.hpp"
#include "facebench/process.hpp"

namespace facebench {

struct IngestOptions {
  std::filesystem::path video_path;
  /// Shell template with {input}, {outdir} and {pattern}; {fps} is required
  /// exactly when `fps` is set. {pattern} expands to "frame_%06d".
  std::string extractor_command;
  std::filesystem::path output_dir;
  std::optional<double> fps;
  /// Skip the extractor when output_dir already holds frames.
  bool reuse = false;
  std::chrono::seconds timeout{0};
  ProcessRunner runner = run_shell_command;
};

inline constexpr const char* kFramePattern = "frame_%06d";

/// Extracts video frames with an external tool and lists them as a manifest
/// rooted at output_dir. Frame ids are the zero-padded frame numbers, in
/// numeric order. Throws ConfigError, ExtractorFailed or NoFramesProduced.
RunManifest ingest_frames(const IngestOptions& options);

/// Manifest over the "frame_NNNNNN.ext" files already present in `dir`
/// (empty when there are none).
RunManifest scan_frame_directory(const std::filesystem::path& dir);

/// Manifest over the image files below `dir` (recursive, sorted by relative
/// path). The relative path is the frame id.
RunManifest scan_image_directory(const std::filesystem::path& dir);

}  // namespace facebench
