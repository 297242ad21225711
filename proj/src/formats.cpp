#include "facebench/formats.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "facebench/errors.hpp"

namespace facebench {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedBlock:
      return "MalformedBlock";
    case ParseErrorKind::MalformedRow:
      return "MalformedRow";
    case ParseErrorKind::InvalidGeometry:
      return "InvalidGeometry";
    case ParseErrorKind::DuplicateFrame:
      return "DuplicateFrame";
  }
  return "ParseError";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail)
    : Error(std::string(to_string(kind)) + " at line " + std::to_string(line) + ": " + detail),
      kind_(kind),
      line_(line),
      detail_(detail) {}

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

std::string slurp(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    pos = end + 1;
  }
  return lines;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_blank(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_blank(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_blank(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_blank(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::size_t> parse_count(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

[[noreturn]] void fail(ParseErrorKind kind, std::size_t line, const std::string& detail) {
  throw ParseError(kind, line, detail);
}

std::string quoted(std::string_view s) {
  constexpr std::size_t kMax = 40;
  std::string out = "'";
  out += s.substr(0, kMax);
  if (s.size() > kMax) out += "...";
  out += "'";
  return out;
}

// --- FDDB -------------------------------------------------------------------

template <class Frame, class RecordParser>
Corpus<Frame> parse_fddb(std::istream& in, RecordParser&& parse_record) {
  const std::string text = slurp(in);
  const auto lines = split_lines(text);
  Corpus<Frame> corpus;
  std::unordered_set<std::string> seen;

  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& name_line = lines[i];
    const std::string_view name = trim(name_line.text);
    if (name.empty()) {
      ++i;
      continue;
    }
    if (!is_valid_frame_id(name)) {
      fail(ParseErrorKind::MalformedBlock, name_line.number, "invalid image name " + quoted(name));
    }
    if (!seen.insert(std::string(name)).second) {
      fail(ParseErrorKind::DuplicateFrame, name_line.number, "image name " + quoted(name) + " repeated");
    }
    if (i + 1 >= lines.size()) {
      fail(ParseErrorKind::MalformedBlock, name_line.number, "missing face count after image name");
    }
    const Line& count_line = lines[i + 1];
    const auto count = parse_count(count_line.text);
    if (!count) {
      fail(ParseErrorKind::MalformedBlock, count_line.number,
           "face count " + quoted(count_line.text) + " is not a nonnegative integer");
    }
    Frame frame;
    frame.frame_id = std::string(name);
    i += 2;
    for (std::size_t k = 0; k < *count; ++k, ++i) {
      if (i >= lines.size()) {
        fail(ParseErrorKind::MalformedBlock, count_line.number,
             "declared " + std::to_string(*count) + " faces, found " + std::to_string(k));
      }
      parse_record(lines[i], frame);
    }
    corpus.frames.push_back(std::move(frame));
  }
  return corpus;
}

std::vector<double> numeric_fields(const Line& line, std::size_t min_fields, std::size_t max_fields,
                                   ParseErrorKind kind) {
  const auto fields = split_ws(line.text);
  if (fields.size() < min_fields || fields.size() > max_fields) {
    fail(kind, line.number,
         "expected " + std::to_string(min_fields) +
             (max_fields != min_fields ? "-" + std::to_string(max_fields) : std::string()) + " fields, got " +
             std::to_string(fields.size()));
  }
  std::vector<double> values;
  values.reserve(fields.size());
  for (const auto f : fields) {
    const auto v = parse_real(f);
    if (!v) fail(kind, line.number, "non-numeric field " + quoted(f));
    values.push_back(*v);
  }
  return values;
}

void parse_ellipse_record(const Line& line, FrameAnnotation& frame) {
  // major_axis_radius minor_axis_radius angle center_x center_y [label]
  const auto v = numeric_fields(line, 5, 6, ParseErrorKind::MalformedBlock);
  double major = v[0];
  double minor = v[1];
  double theta = v[2];
  if (!(major > 0.0) || !(minor > 0.0)) {
    fail(ParseErrorKind::InvalidGeometry, line.number, "ellipse radii must be positive");
  }
  if (major < minor) {
    // Same ellipse, axes relabelled.
    std::swap(major, minor);
    theta += std::numbers::pi / 2.0;
  }
  try {
    frame.ground_truth.push_back(ellipse_to_bbox(EllipseRegion(v[3], v[4], major, minor, theta)));
  } catch (const GeometryError& e) {
    fail(ParseErrorKind::InvalidGeometry, line.number, e.what());
  }
}

void parse_rect_record(const Line& line, FrameDetections& frame) {
  const auto v = numeric_fields(line, 5, 5, ParseErrorKind::MalformedBlock);
  if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
    fail(ParseErrorKind::InvalidGeometry, line.number, "width and height must be positive");
  }
  try {
    frame.detections.emplace_back(BoundingBox(v[0], v[1], v[2], v[3]), v[4]);
  } catch (const GeometryError& e) {
    fail(ParseErrorKind::InvalidGeometry, line.number, e.what());
  }
}

// --- CSV --------------------------------------------------------------------

// RFC 4180 style splitting restricted to one physical line.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  std::size_t i = 0;
  bool in_quotes = false;
  bool was_quoted = false;
  while (i < line.size()) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!std::string(trim(field)).empty() || was_quoted) return std::nullopt;
      field.clear();
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else if (was_quoted && !is_blank(c)) {
      return std::nullopt;
    } else if (!was_quoted) {
      field += c;
    }
    ++i;
  }
  if (in_quotes) return std::nullopt;
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

std::string_view strip_bom(std::string_view s) {
  if (s.substr(0, 3) == "\xEF\xBB\xBF") s.remove_prefix(3);
  return s;
}

template <class Frame, class RowParser>
Corpus<Frame> parse_csv(std::istream& in, std::string_view header, std::size_t arity, RowParser&& parse_row) {
  const std::string text = slurp(in);
  const auto lines = split_lines(strip_bom(text));
  Corpus<Frame> corpus;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i].text).empty()) ++i;
  if (i == lines.size()) return corpus;
  if (trim(lines[i].text) != header) {
    fail(ParseErrorKind::MalformedRow, lines[i].number,
         "expected header '" + std::string(header) + "', got " + quoted(lines[i].text));
  }
  for (++i; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (trim(line.text).empty()) continue;
    const auto fields = split_csv(line.text);
    if (!fields) fail(ParseErrorKind::MalformedRow, line.number, "unbalanced quotes");
    if (fields->size() != arity) {
      fail(ParseErrorKind::MalformedRow, line.number,
           "expected " + std::to_string(arity) + " fields, got " + std::to_string(fields->size()));
    }
    const std::string& id = (*fields)[0];
    if (!is_valid_frame_id(id)) fail(ParseErrorKind::MalformedRow, line.number, "invalid frame_id " + quoted(id));

    auto [it, inserted] = index.try_emplace(id, corpus.frames.size());
    if (inserted) {
      Frame frame;
      frame.frame_id = id;
      corpus.frames.push_back(std::move(frame));
    }
    Frame& frame = corpus.frames[it->second];

    bool all_empty = true;
    bool any_empty = false;
    for (std::size_t k = 1; k < arity; ++k) {
      const bool empty = (*fields)[k].empty();
      all_empty = all_empty && empty;
      any_empty = any_empty || empty;
    }
    if (all_empty) continue;  // annotated frame without faces
    if (any_empty) fail(ParseErrorKind::MalformedRow, line.number, "partially empty row");

    std::array<double, 5> v{};
    for (std::size_t k = 1; k < arity; ++k) {
      const auto value = parse_real((*fields)[k]);
      if (!value) fail(ParseErrorKind::MalformedRow, line.number, "non-numeric field " + quoted((*fields)[k]));
      v[k - 1] = *value;
    }
    if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
      fail(ParseErrorKind::InvalidGeometry, line.number, "width and height must be positive");
    }
    try {
      parse_row(v, frame);
    } catch (const GeometryError& e) {
      fail(ParseErrorKind::InvalidGeometry, line.number, e.what());
    }
  }
  return corpus;
}

void write_csv_field(std::string_view field, std::ostream& out) {
  if (field.find_first_of(",\"") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (const char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void check_writable_id(const std::string& id) {
  if (!is_valid_frame_id(id)) throw std::invalid_argument("frame_id " + quoted(id) + " cannot be serialized");
}

template <class Frame>
void require_unique(const Corpus<Frame>& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& f : corpus.frames) {
    if (!seen.insert(f.frame_id).second) throw DuplicateFrameError(f.frame_id);
  }
}

}  // namespace

bool is_valid_frame_id(std::string_view id) {
  if (id.empty() || is_blank(id.front()) || is_blank(id.back())) return false;
  for (const char c : id) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7F) return false;
  }
  return true;
}

void require_unique_frames(const AnnotationCorpus& corpus) { require_unique(corpus); }
void require_unique_frames(const DetectionCorpus& corpus) { require_unique(corpus); }

AnnotationCorpus parse_fddb_annotations(std::istream& in) {
  return parse_fddb<FrameAnnotation>(in, parse_ellipse_record);
}

DetectionCorpus parse_fddb_detections(std::istream& in) {
  return parse_fddb<FrameDetections>(in, parse_rect_record);
}

AnnotationCorpus parse_csv_annotations(std::istream& in) {
  return parse_csv<FrameAnnotation>(in, kCsvAnnotationHeader, 5,
                                    [](const std::array<double, 5>& v, FrameAnnotation& frame) {
                                      frame.ground_truth.emplace_back(v[0], v[1], v[2], v[3]);
                                    });
}

DetectionCorpus parse_csv_detections(std::istream& in) {
  return parse_csv<FrameDetections>(in, kCsvDetectionHeader, 6,
                                    [](const std::array<double, 5>& v, FrameDetections& frame) {
                                      frame.detections.emplace_back(BoundingBox(v[0], v[1], v[2], v[3]), v[4]);
                                    });
}

std::string format_real(double value) {
  // Fixed notation, shortest digits that round-trip; +-1e308 needs ~310 chars.
  std::array<char, 400> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  if (ec != std::errc()) throw std::logic_error("format_real: buffer too small");
  return std::string(buf.data(), ptr);
}

void write_detections(const DetectionCorpus& corpus, DetectionFormat format, std::ostream& out) {
  if (format == DetectionFormat::Fddb) {
    for (const auto& frame : corpus.frames) {
      check_writable_id(frame.frame_id);
      out << frame.frame_id << '\n' << frame.detections.size() << '\n';
      for (const auto& d : frame.detections) {
        out << format_real(d.box.x()) << ' ' << format_real(d.box.y()) << ' ' << format_real(d.box.w()) << ' '
            << format_real(d.box.h()) << ' ' << format_real(d.score) << '\n';
      }
    }
    return;
  }
  out << kCsvDetectionHeader << '\n';
  for (const auto& frame : corpus.frames) {
    check_writable_id(frame.frame_id);
    if (frame.detections.empty()) {
      write_csv_field(frame.frame_id, out);
      out << ",,,,,\n";
    }
    for (const auto& d : frame.detections) {
      write_csv_field(frame.frame_id, out);
      out << ',' << format_real(d.box.x()) << ',' << format_real(d.box.y()) << ',' << format_real(d.box.w()) << ','
          << format_real(d.box.h()) << ',' << format_real(d.score) << '\n';
    }
  }
}

std::string write_detections(const DetectionCorpus& corpus, DetectionFormat format) {
  std::ostringstream out;
  write_detections(corpus, format, out);
  return out.str();
}

void write_csv_annotations(const AnnotationCorpus& corpus, std::ostream& out) {
  out << kCsvAnnotationHeader << '\n';
  for (const auto& frame : corpus.frames) {
    check_writable_id(frame.frame_id);
    if (frame.ground_truth.empty()) {
      write_csv_field(frame.frame_id, out);
      out << ",,,,\n";
    }
    for (const auto& b : frame.ground_truth) {
      write_csv_field(frame.frame_id, out);
      out << ',' << format_real(b.x()) << ',' << format_real(b.y()) << ',' << format_real(b.w()) << ','
          << format_real(b.h()) << '\n';
    }
  }
}

std::string write_csv_annotations(const AnnotationCorpus& corpus) {
  std::ostringstream out;
  write_csv_annotations(corpus, out);
  return out.str();
}

std::string csv_field(std::string_view field) {
  std::ostringstream out;
  write_csv_field(field, out);
  return out.str();
}

bool looks_like_csv(std::string_view text) {
  text = strip_bom(text);
  for (const auto& line : split_lines(text)) {
    const auto t = trim(line.text);
    if (t.empty()) continue;
    return t.starts_with("frame_id,");
  }
  return false;
}

}  // namespace facebench
