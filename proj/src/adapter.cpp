#include "facebench/adapter.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "facebench/errors.hpp"
#include "fs_util.hpp"

namespace facebench {

namespace fs = std::filesystem;

fs::path RunManifest::resolve(const ManifestEntry& entry) const {
  const fs::path p(entry.image_path);
  return p.is_absolute() ? p : corpus_root / p;
}

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_path_text(std::string_view p) {
  if (p.empty()) return false;
  for (const char c : p) {
    if (static_cast<unsigned char>(c) < 0x20) return false;
  }
  return true;
}

std::string format_lines(const RunManifest& manifest, bool resolved) {
  std::string out;
  for (const auto& e : manifest.frames) {
    out += e.frame_id;
    out += '\t';
    out += resolved ? fs::absolute(manifest.resolve(e)).lexically_normal().string() : e.image_path;
    out += '\n';
  }
  return out;
}

bool valid_adapter_name(std::string_view name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

RunManifest parse_manifest(std::istream& in, const fs::path& corpus_root) {
  RunManifest manifest;
  manifest.corpus_root = corpus_root;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string_view line = trim_cr(raw);
    if (trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError(ParseErrorKind::MalformedRow, number, "expected 'frame_id<TAB>image_path'");
    }
    ManifestEntry entry{std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
    if (!is_valid_frame_id(entry.frame_id)) {
      throw ParseError(ParseErrorKind::MalformedRow, number, "invalid frame_id");
    }
    if (!valid_path_text(entry.image_path)) {
      throw ParseError(ParseErrorKind::MalformedRow, number, "invalid image path");
    }
    if (!seen.insert(entry.frame_id).second) {
      throw ParseError(ParseErrorKind::DuplicateFrame, number, "frame_id '" + entry.frame_id + "' repeated");
    }
    manifest.frames.push_back(std::move(entry));
  }
  return manifest;
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path());
}

std::string format_manifest(const RunManifest& manifest) { return format_lines(manifest, false); }

std::string format_resolved_manifest(const RunManifest& manifest) { return format_lines(manifest, true); }

void AdapterConfig::validate() const {
  if (!valid_adapter_name(name)) {
    throw ConfigError("adapter name '" + name + "' must be non-empty and use only [A-Za-z0-9._-]");
  }
  for (const char* placeholder : {"manifest", "output"}) {
    if (count_placeholder(command_template, placeholder) != 1) {
      throw ConfigError(std::string("adapter command must contain {") + placeholder + "} exactly once");
    }
  }
  if (timeout.count() <= 0) throw ConfigError("adapter timeout must be positive");
}

AdapterConfig parse_adapter_config(std::istream& in, const fs::path& base_dir) {
  AdapterConfig config;
  config.working_dir = base_dir;
  bool have_name = false;
  bool have_command = false;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("adapter config line " + std::to_string(number) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key == "name") {
      config.name = value;
      have_name = true;
    } else if (key == "command") {
      config.command_template = value;
      have_command = true;
    } else if (key == "workdir") {
      const fs::path p(value);
      config.working_dir = p.is_absolute() ? p : base_dir / p;
    } else if (key == "timeout_seconds") {
      long long seconds = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seconds);
      if (ec != std::errc() || ptr != value.data() + value.size() || seconds <= 0) {
        throw ConfigError("adapter config line " + std::to_string(number) + ": timeout_seconds must be a positive integer");
      }
      config.timeout = std::chrono::seconds(seconds);
    } else if (key.starts_with("env.") && key.size() > 4) {
      config.env.emplace_back(key.substr(4), value);
    } else {
      throw ConfigError("adapter config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  if (!have_name) throw ConfigError("adapter config is missing 'name'");
  if (!have_command) throw ConfigError("adapter config is missing 'command'");
  config.validate();
  return config;
}

AdapterConfig load_adapter_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read adapter config '" + path.string() + "'");
  return parse_adapter_config(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

namespace {

AdapterRun normalize(const RunManifest& manifest, DetectionCorpus produced) {
  AdapterRun run;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < produced.frames.size(); ++i) index.emplace(produced.frames[i].frame_id, i);
  std::unordered_set<std::string_view> expected;
  for (const auto& entry : manifest.frames) {
    expected.insert(entry.frame_id);
    FrameDetections frame;
    frame.frame_id = entry.frame_id;
    const auto it = index.find(entry.frame_id);
    if (it != index.end()) {
      frame.detections = std::move(produced.frames[it->second].detections);
    } else {
      run.missing_frames.push_back(entry.frame_id);
    }
    run.detections.frames.push_back(std::move(frame));
  }
  for (const auto& f : produced.frames) {
    if (!expected.contains(f.frame_id)) run.unexpected_frames.push_back(f.frame_id);
  }
  return run;
}

}  // namespace

AdapterRun run_adapter(const AdapterConfig& config, const RunManifest& manifest, const AdapterRunOptions& options) {
  config.validate();
  if (manifest.frames.empty()) throw ConfigError("manifest is empty");

  const std::string manifest_text = format_resolved_manifest(manifest);
  const bool caching = !options.cache_dir.empty();
  fs::path cache_file;
  if (caching) {
    cache_file = options.cache_dir / config.name / (sha256_hex(manifest_text) + ".csv");
    if (options.use_cache && fs::exists(cache_file)) {
      std::ifstream in(cache_file, std::ios::binary);
      try {
        DetectionCorpus cached = parse_csv_detections(in);
        AdapterRun run = normalize(manifest, std::move(cached));
        // An entry that no longer lines up with the manifest is re-run.
        if (run.missing_frames.empty() && run.unexpected_frames.empty()) {
          run.from_cache = true;
          run.cache_file = cache_file;
          run.detections.source_path = cache_file.string();
          return run;
        }
      } catch (const ParseError&) {
      }
    }
  }

  const fs::path scratch_parent = caching ? options.cache_dir / config.name : fs::temp_directory_path();
  detail::ScratchDir scratch(scratch_parent, caching ? ".run-" : "facebench-run-");
  const fs::path manifest_path = scratch.path() / "manifest.tsv";
  const fs::path output_path = scratch.path() / "detections.csv";
  detail::write_file_atomic(manifest_path, manifest_text);

  ProcessSpec spec;
  spec.command = substitute_placeholders(
      config.command_template,
      {{"manifest", shell_quote(manifest_path.string())}, {"output", shell_quote(output_path.string())}});
  spec.working_dir = config.working_dir;
  spec.env = config.env;
  spec.timeout = std::chrono::duration_cast<std::chrono::milliseconds>(config.timeout);

  const ProcessResult result = options.runner(spec);
  if (result.timed_out) {
    throw AdapterFailed("adapter '" + config.name + "' timed out after " + std::to_string(config.timeout.count()) + " s",
                        result.exit_code, true, result.stderr_text);
  }
  if (result.exit_code != 0) {
    throw AdapterFailed("adapter '" + config.name + "' exited with code " + std::to_string(result.exit_code),
                        result.exit_code, false, result.stderr_text);
  }

  DetectionCorpus produced;
  {
    std::ifstream in(output_path, std::ios::binary);
    if (!in) {
      throw AdapterOutputMalformed(config.name,
                                   ParseError(ParseErrorKind::MalformedRow, 0, "output file was not created"));
    }
    try {
      produced = parse_csv_detections(in);
    } catch (const ParseError& e) {
      throw AdapterOutputMalformed(config.name, e);
    }
  }

  AdapterRun run = normalize(manifest, std::move(produced));
  run.diagnostics = result.stderr_text;
  if (caching) {
    detail::write_file_atomic(cache_file, write_detections(run.detections, DetectionFormat::Csv));
    run.cache_file = cache_file;
    run.detections.source_path = cache_file.string();
  }
  return run;
}

}  // namespace facebench
