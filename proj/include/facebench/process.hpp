#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace facebench {

struct ProcessSpec {
  /// Passed to /bin/sh -c.
  std::string command;
  /// Empty means inherit the current directory.
  std::filesystem::path working_dir;
  /// Added to (or overriding) the inherited environment.
  std::vector<std::pair<std::string, std::string>> env;
  /// Zero disables the timeout.
  std::chrono::milliseconds timeout{0};
};

struct ProcessResult {
  int exit_code = 0;  // 128 + signal number when killed by a signal
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;

  bool ok() const { return exit_code == 0 && !timed_out; }
};

/// Launches external commands. Swappable so callers can observe or fake
/// process launches.
using ProcessRunner = std::function<ProcessResult(const ProcessSpec&)>;

/// Runs the command in its own process group with stdin closed, capturing
/// both output streams. On timeout the whole group is killed.
ProcessResult run_shell_command(const ProcessSpec& spec);

/// Single-quotes `value` for POSIX sh.
std::string shell_quote(std::string_view value);

/// Number of occurrences of "{name}" in `text`.
std::size_t count_placeholder(std::string_view text, std::string_view name);

/// Replaces every "{key}" with its value; unknown braces are left alone.
std::string substitute_placeholders(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace facebench
