#include "facebench/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <system_error>

#include "facebench/errors.hpp"
#include "facebench/formats.hpp"

namespace facebench {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// "frame_000123.png" -> "000123"; empty when the name does not match.
std::string frame_number(const std::string& filename) {
  constexpr std::string_view prefix = "frame_";
  if (!std::string_view(filename).starts_with(prefix)) return {};
  const std::size_t dot = filename.find('.', prefix.size());
  if (dot == std::string::npos || dot + 1 >= filename.size()) return {};
  const std::string digits = filename.substr(prefix.size(), dot - prefix.size());
  if (digits.size() < 6) return {};
  for (const char c : digits) {
    if (c < '0' || c > '9') return {};
  }
  for (std::size_t i = dot + 1; i < filename.size(); ++i) {
    if (!std::isalnum(static_cast<unsigned char>(filename[i]))) return {};
  }
  return digits;
}

// Orders digit strings by value, then by spelling so "01" and "1" stay distinct.
bool numeric_less(const std::string& a, const std::string& b) {
  const std::string_view va = std::string_view(a).substr(std::min(a.find_first_not_of('0'), a.size()));
  const std::string_view vb = std::string_view(b).substr(std::min(b.find_first_not_of('0'), b.size()));
  if (va.size() != vb.size()) return va.size() < vb.size();
  if (va != vb) return va < vb;
  return a < b;
}

}  // namespace

RunManifest scan_frame_directory(const fs::path& dir) {
  RunManifest manifest;
  manifest.corpus_root = dir;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return manifest;

  std::map<std::string, std::string, decltype(&numeric_less)> frames(&numeric_less);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string number = frame_number(name);
    if (number.empty()) continue;
    const auto [it, inserted] = frames.emplace(number, name);
    if (!inserted) {
      throw ConfigError("frame " + number + " appears twice in '" + dir.string() + "' (" + it->second + ", " + name +
                        ")");
    }
  }
  for (const auto& [number, name] : frames) manifest.frames.push_back({number, name});
  return manifest;
}

RunManifest scan_image_directory(const fs::path& dir) {
  static const std::vector<std::string> kExtensions = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".ppm", ".pgm",
                                                       ".tif", ".tiff", ".webp"};
  if (!fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
  RunManifest manifest;
  manifest.corpus_root = dir;
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower(entry.path().extension().string());
    if (std::find(kExtensions.begin(), kExtensions.end(), ext) == kExtensions.end()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (is_valid_frame_id(rel)) paths.push_back(rel);
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) manifest.frames.push_back({p, p});
  return manifest;
}

RunManifest ingest_frames(const IngestOptions& options) {
  for (const char* placeholder : {"input", "outdir", "pattern"}) {
    if (count_placeholder(options.extractor_command, placeholder) == 0) {
      throw ConfigError(std::string("extractor command must contain {") + placeholder + "}");
    }
  }
  const bool has_fps = count_placeholder(options.extractor_command, "fps") > 0;
  if (options.fps && !has_fps) throw ConfigError("--fps given but the extractor command has no {fps}");
  if (!options.fps && has_fps) throw ConfigError("extractor command uses {fps} but no fps was given");
  if (options.fps && !(*options.fps > 0.0)) throw ConfigError("fps must be positive");
  if (!fs::is_regular_file(options.video_path)) {
    throw ConfigError("video file '" + options.video_path.string() + "' does not exist");
  }

  if (options.reuse) {
    RunManifest existing = scan_frame_directory(options.output_dir);
    if (!existing.frames.empty()) return existing;
  }

  std::error_code ec;
  fs::create_directories(options.output_dir, ec);
  if (ec) throw OutputUnwritableError("cannot create '" + options.output_dir.string() + "': " + ec.message());

  std::map<std::string, std::string> values = {
      {"input", shell_quote(options.video_path.string())},
      {"outdir", shell_quote(options.output_dir.string())},
      {"pattern", shell_quote(kFramePattern)},
  };
  if (options.fps) values["fps"] = format_real(*options.fps);

  ProcessSpec spec;
  spec.command = substitute_placeholders(options.extractor_command, values);
  spec.timeout = std::chrono::duration_cast<std::chrono::milliseconds>(options.timeout);
  const ProcessResult result = options.runner(spec);
  if (!result.ok()) {
    throw ExtractorFailed(result.timed_out ? "frame extractor timed out"
                                           : "frame extractor exited with code " + std::to_string(result.exit_code),
                          result.exit_code, result.timed_out, result.stderr_text);
  }

  RunManifest manifest = scan_frame_directory(options.output_dir);
  if (manifest.frames.empty()) {
    throw NoFramesProduced("frame extractor produced no frame_NNNNNN files in '" + options.output_dir.string() + "'");
  }
  return manifest;
}

}  // namespace facebench
