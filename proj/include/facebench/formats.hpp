#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "facebench/geometry.hpp"

namespace facebench {

struct FrameAnnotation {
  std::string frame_id;
  std::vector<BoundingBox> ground_truth;

  bool operator==(const FrameAnnotation&) const = default;
};

struct FrameDetections {
  std::string frame_id;
  std::vector<Detection> detections;

  bool operator==(const FrameDetections&) const = default;
};

/// Ordered collection of frames read from one source. Frame ids are expected
/// to be unique; parsers enforce it, hand-built corpora can be checked with
/// require_unique_frames().
template <class Frame>
struct Corpus {
  std::vector<Frame> frames;
  std::string source_path;

  const Frame* find(std::string_view frame_id) const {
    for (const auto& f : frames) {
      if (f.frame_id == frame_id) return &f;
    }
    return nullptr;
  }
};

using AnnotationCorpus = Corpus<FrameAnnotation>;
using DetectionCorpus = Corpus<FrameDetections>;

/// Frame ids are opaque keys: non-empty, no control characters (so they fit
/// on one line and in a tab-separated manifest), no surrounding spaces.
bool is_valid_frame_id(std::string_view id);

/// Throws DuplicateFrameError on the first repeated frame id.
void require_unique_frames(const AnnotationCorpus& corpus);
void require_unique_frames(const DetectionCorpus& corpus);

// Parsers. All of them throw ParseError carrying a 1-based line number and
// never anything else, whatever bytes they are fed.

/// FDDB ellipse list: name line, count line, `count` lines of
/// "major minor angle center_x center_y [label]". Ellipses become boxes.
AnnotationCorpus parse_fddb_annotations(std::istream& in);
/// FDDB rectangle list: name line, count line, lines "left top width height score".
DetectionCorpus parse_fddb_detections(std::istream& in);
/// CSV with header "frame_id,x,y,w,h". A row with empty geometry fields marks
/// a frame annotated as containing no faces.
AnnotationCorpus parse_csv_annotations(std::istream& in);
/// CSV with header "frame_id,x,y,w,h,score".
DetectionCorpus parse_csv_detections(std::istream& in);

enum class DetectionFormat { Fddb, Csv };

void write_detections(const DetectionCorpus& corpus, DetectionFormat format, std::ostream& out);
std::string write_detections(const DetectionCorpus& corpus, DetectionFormat format);
void write_csv_annotations(const AnnotationCorpus& corpus, std::ostream& out);
std::string write_csv_annotations(const AnnotationCorpus& corpus);

inline constexpr std::string_view kCsvAnnotationHeader = "frame_id,x,y,w,h";
inline constexpr std::string_view kCsvDetectionHeader = "frame_id,x,y,w,h,score";

/// Shortest fixed-notation decimal that parses back to exactly `value`.
std::string format_real(double value);

/// `field` quoted for CSV when it contains a comma or a double quote.
std::string csv_field(std::string_view field);

/// Content sniffing for CLI inputs: CSV files start with a "frame_id," header.
bool looks_like_csv(std::string_view text);

}  // namespace facebench
