#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace facebench {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A box or ellipse violated its invariants (non-positive extent, NaN, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  MalformedBlock,
  MalformedRow,
  InvalidGeometry,
  DuplicateFrame,
};

const char* to_string(ParseErrorKind kind);

/// Structured parser failure. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
  std::string detail_;
};

class DuplicateFrameError : public Error {
 public:
  explicit DuplicateFrameError(const std::string& frame_id)
      : Error("duplicate frame_id '" + frame_id + "'"), frame_id_(frame_id) {}
  const std::string& frame_id() const { return frame_id_; }

 private:
  std::string frame_id_;
};

class MixedThresholdError : public Error {
 public:
  using Error::Error;
};

class EmptyGroundTruthError : public Error {
 public:
  EmptyGroundTruthError() : Error("ground-truth corpus contains no boxes") {}
};

/// Bad user-supplied configuration (adapter config, evaluation config, templates).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class OutputUnwritableError : public Error {
 public:
  using Error::Error;
};

/// External process (adapter or frame extractor) failed.
class ProcessFailure : public Error {
 public:
  ProcessFailure(const std::string& what, int exit_code, bool timed_out, std::string diagnostics)
      : Error(what), exit_code_(exit_code), timed_out_(timed_out), diagnostics_(std::move(diagnostics)) {}

  int exit_code() const { return exit_code_; }
  bool timed_out() const { return timed_out_; }
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  int exit_code_;
  bool timed_out_;
  std::string diagnostics_;
};

class AdapterFailed : public ProcessFailure {
 public:
  using ProcessFailure::ProcessFailure;
};

class ExtractorFailed : public ProcessFailure {
 public:
  using ProcessFailure::ProcessFailure;
};

class NoFramesProduced : public Error {
 public:
  using Error::Error;
};

/// Adapter exited cleanly but its output does not parse.
class AdapterOutputMalformed : public Error {
 public:
  AdapterOutputMalformed(const std::string& adapter, const ParseError& cause)
      : Error("adapter '" + adapter + "' produced malformed output: " + cause.what()),
        adapter_(adapter),
        line_(cause.line()) {}

  const std::string& adapter() const { return adapter_; }
  std::size_t line() const { return line_; }

 private:
  std::string adapter_;
  std::size_t line_;
};

}  // namespace facebench
