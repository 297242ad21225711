#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "facebench/formats.hpp"
#include "facebench/process.hpp"

namespace facebench {

struct ManifestEntry {
  std::string frame_id;
  /// Relative to the manifest's corpus root, or absolute.
  std::string image_path;

  bool operator==(const ManifestEntry&) const = default;
};

/// Ordered frames of one run. Text form is one "frame_id<TAB>image_path"
/// line per frame, UTF-8, LF endings.
struct RunManifest {
  std::vector<ManifestEntry> frames;
  std::filesystem::path corpus_root;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// Throws ParseError (MalformedRow / DuplicateFrame) with the line number.
RunManifest parse_manifest(std::istream& in, const std::filesystem::path& corpus_root);
/// Relative image paths are resolved against the manifest's directory.
RunManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const RunManifest& manifest);
/// Same lines with every image path made absolute; this is what adapters see.
std::string format_resolved_manifest(const RunManifest& manifest);

struct AdapterConfig {
  std::string name;
  /// Must contain {manifest} and {output} exactly once each.
  std::string command_template;
  std::filesystem::path working_dir;
  std::chrono::seconds timeout{600};
  std::vector<std::pair<std::string, std::string>> env;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses "key=value" lines: name, command, workdir, timeout_seconds and
/// env.NAME entries. '#' starts a comment line. A relative workdir is taken
/// relative to `base_dir`. Throws ConfigError.
AdapterConfig parse_adapter_config(std::istream& in, const std::filesystem::path& base_dir);
AdapterConfig load_adapter_config(const std::filesystem::path& path);

struct AdapterRunOptions {
  /// Empty disables caching; the run then uses a scratch directory.
  std::filesystem::path cache_dir;
  /// false forces a fresh run (the result still refreshes the cache).
  bool use_cache = true;
  ProcessRunner runner = run_shell_command;
};

struct AdapterRun {
  /// Manifest order, one entry per manifest frame.
  DetectionCorpus detections;
  /// Manifest frames the adapter did not report; treated as zero detections.
  std::vector<std::string> missing_frames;
  /// Frames reported by the adapter that are not in the manifest; dropped.
  std::vector<std::string> unexpected_frames;
  bool from_cache = false;
  std::filesystem::path cache_file;
  /// Whatever the adapter wrote to stderr.
  std::string diagnostics;
};

/// Hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Runs the adapter over the manifest through the batch file protocol and
/// returns its detections. Results are cached at
/// cache_dir/<name>/<sha256 of the resolved manifest>.csv and published by
/// atomic rename, so a failed run never leaves a partial cache entry.
AdapterRun run_adapter(const AdapterConfig& config, const RunManifest& manifest, const AdapterRunOptions& options);

}  // namespace facebench
