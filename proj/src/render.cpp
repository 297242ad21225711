#include "facebench/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unordered_map>

#include "facebench/errors.hpp"
#include "facebench/parallel.hpp"
#include "fs_util.hpp"

namespace facebench {

namespace fs = std::filesystem;

namespace {

constexpr const char* kGroundTruthColor = "#ff0000";
constexpr const char* kDetectionColor = "#00ff00";
constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v, int precision) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  return ec == std::errc() ? std::string(buf.data(), ptr) : format_real(v);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string uri_encode_path(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    const bool keep = std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~';
    if (keep) {
      out += ch;
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::uint16_t be16(const unsigned char* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

std::optional<ImageSize> probe_jpeg(std::istream& in) {
  // Walk segments until a start-of-frame marker.
  unsigned char marker[2];
  while (in.read(reinterpret_cast<char*>(marker), 1)) {
    if (marker[0] != 0xFF) return std::nullopt;
    do {
      if (!in.read(reinterpret_cast<char*>(marker + 1), 1)) return std::nullopt;
    } while (marker[1] == 0xFF);
    const unsigned char m = marker[1];
    if (m == 0xD8 || m == 0x01 || (m >= 0xD0 && m <= 0xD7)) continue;
    if (m == 0xD9 || m == 0xDA) return std::nullopt;
    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) return std::nullopt;
    const std::uint16_t len = be16(len_bytes);
    if (len < 2) return std::nullopt;
    const bool sof = (m >= 0xC0 && m <= 0xCF) && m != 0xC4 && m != 0xC8 && m != 0xCC;
    if (sof) {
      unsigned char body[5];
      if (len < 7 || !in.read(reinterpret_cast<char*>(body), 5)) return std::nullopt;
      const int height = be16(body + 1);
      const int width = be16(body + 3);
      if (width <= 0 || height <= 0) return std::nullopt;
      return ImageSize{width, height};
    }
    in.seekg(len - 2, std::ios::cur);
  }
  return std::nullopt;
}

}  // namespace

std::optional<ImageSize> probe_image_size(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::array<unsigned char, 24> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(in.gcount());

  static constexpr unsigned char kPng[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (got >= 24 && std::equal(std::begin(kPng), std::end(kPng), head.begin()) &&
      std::string_view(reinterpret_cast<const char*>(head.data() + 12), 4) == "IHDR") {
    const auto w = be32(head.data() + 16);
    const auto h = be32(head.data() + 20);
    if (w == 0 || h == 0 || w > 1u << 30 || h > 1u << 30) return std::nullopt;
    return ImageSize{static_cast<int>(w), static_cast<int>(h)};
  }
  if (got >= 10 && (std::string_view(reinterpret_cast<const char*>(head.data()), 6) == "GIF87a" ||
                    std::string_view(reinterpret_cast<const char*>(head.data()), 6) == "GIF89a")) {
    const int w = head[6] | (head[7] << 8);
    const int h = head[8] | (head[9] << 8);
    if (w == 0 || h == 0) return std::nullopt;
    return ImageSize{w, h};
  }
  if (got >= 2 && head[0] == 0xFF && head[1] == 0xD8) {
    in.clear();
    in.seekg(2);
    return probe_jpeg(in);
  }
  return std::nullopt;
}

std::string render_overlay_svg(const std::string& frame_id, const std::string& image_href,
                               std::optional<ImageSize> size, std::span<const BoundingBox> ground_truth,
                               std::span<const Detection> detections) {
  double width = 1.0;
  double height = 1.0;
  if (size) {
    width = size->width;
    height = size->height;
  } else {
    for (const auto& b : ground_truth) {
      width = std::max(width, std::ceil(b.right()));
      height = std::max(height, std::ceil(b.bottom()));
    }
    for (const auto& d : detections) {
      width = std::max(width, std::ceil(d.box.right()));
      height = std::max(height, std::ceil(d.box.bottom()));
    }
  }
  const std::string w = format_real(width);
  const std::string h = format_real(height);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "  <title>" << xml_escape(frame_id) << "</title>\n"
      << "  <image x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" href=\"" << xml_escape(image_href)
      << "\" xlink:href=\"" << xml_escape(image_href) << "\"/>\n";
  for (const auto& b : ground_truth) {
    svg << "  <rect class=\"ground-truth\" x=\"" << format_real(b.x()) << "\" y=\"" << format_real(b.y())
        << "\" width=\"" << format_real(b.w()) << "\" height=\"" << format_real(b.h()) << "\" fill=\"none\" stroke=\""
        << kGroundTruthColor << "\" stroke-width=\"2\"/>\n";
  }
  for (const auto& d : detections) {
    svg << "  <rect class=\"detection\" x=\"" << format_real(d.box.x()) << "\" y=\"" << format_real(d.box.y())
        << "\" width=\"" << format_real(d.box.w()) << "\" height=\"" << format_real(d.box.h())
        << "\" fill=\"none\" stroke=\"" << kDetectionColor << "\" stroke-width=\"2\"/>\n";
    const double label_y = d.box.y() - 3.0 >= 10.0 ? d.box.y() - 3.0 : d.box.y() + 12.0;
    svg << "  <text class=\"score\" x=\"" << format_real(d.box.x()) << "\" y=\"" << format_real(label_y)
        << "\" fill=\"" << kDetectionColor << "\" font-family=\"sans-serif\" font-size=\"12\">" << fixed(d.score, 3)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string overlay_file_stem(const std::string& frame_id) {
  std::string stem;
  for (const char ch : frame_id) {
    const auto c = static_cast<unsigned char>(ch);
    stem += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? ch : '_';
  }
  if (stem.empty() || stem.front() == '.') stem.insert(stem.begin(), '_');
  return stem;
}

std::size_t render_overlays(const RunManifest& manifest, const AnnotationCorpus& gts, const DetectionCorpus& dets,
                            const fs::path& out_dir, unsigned workers) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw OutputUnwritableError("cannot create overlay directory '" + out_dir.string() + "'");
  }
  const fs::path abs_out = fs::absolute(out_dir);

  std::unordered_map<std::string_view, const FrameAnnotation*> gt_of;
  for (const auto& f : gts.frames) gt_of.emplace(f.frame_id, &f);
  std::unordered_map<std::string_view, const FrameDetections*> det_of;
  for (const auto& f : dets.frames) det_of.emplace(f.frame_id, &f);

  // Names are fixed up front so they do not depend on scheduling.
  std::vector<std::string> names;
  std::set<std::string> used;
  for (const auto& entry : manifest.frames) {
    const std::string stem = overlay_file_stem(entry.frame_id);
    std::string name = stem + ".svg";
    for (int k = 2; used.contains(name); ++k) name = stem + "-" + std::to_string(k) + ".svg";
    used.insert(name);
    names.push_back(std::move(name));
  }

  parallel_for(manifest.frames.size(), workers, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.frames[i];
    const fs::path image = fs::absolute(manifest.resolve(entry)).lexically_normal();
    fs::path rel = image.lexically_relative(abs_out.lexically_normal());
    const std::string href = uri_encode_path((rel.empty() ? image : rel).generic_string());

    std::span<const BoundingBox> frame_gts;
    std::span<const Detection> frame_dets;
    if (const auto it = gt_of.find(entry.frame_id); it != gt_of.end()) frame_gts = it->second->ground_truth;
    if (const auto it = det_of.find(entry.frame_id); it != det_of.end()) frame_dets = it->second->detections;

    const std::string svg = render_overlay_svg(entry.frame_id, href, probe_image_size(image), frame_gts, frame_dets);
    detail::write_file_atomic(out_dir / names[i], svg);
  });
  return manifest.frames.size();
}

std::string render_roc_svg(std::span<const LabeledCurve> curves) {
  constexpr double kWidth = 640.0, kHeight = 480.0;
  constexpr double kLeft = 70.0, kRight = 20.0, kTop = 20.0, kBottom = 55.0;
  constexpr double kPlotW = kWidth - kLeft - kRight;
  constexpr double kPlotH = kHeight - kTop - kBottom;

  std::size_t max_fp = 0;
  for (const auto& c : curves) {
    for (const auto& p : c.curve.points) max_fp = std::max(max_fp, p.false_positives);
  }
  // 1-2-5 tick step, integral since the axis counts false positives.
  const double raw_step = std::max(1.0, static_cast<double>(max_fp) / 5.0);
  const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw_step) {
      step = m * mag;
      break;
    }
  }
  step = std::max(1.0, std::round(step));
  const double x_max = std::max(step, std::ceil(static_cast<double>(max_fp) / step) * step);

  const auto px = [&](double fp) { return kLeft + kPlotW * fp / x_max; };
  const auto py = [&](double tpr) { return kTop + kPlotH * (1.0 - tpr); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n"
      << "  <g class=\"grid\" stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int k = 0; k <= 10; ++k) {
    const double y = py(k / 10.0);
    svg << "    <line x1=\"" << fixed(kLeft, 2) << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << fixed(kLeft + kPlotW, 2)
        << "\" y2=\"" << fixed(y, 2) << "\"/>\n";
  }
  for (double v = 0.0; v <= x_max + 0.5 * step; v += step) {
    const double x = px(v);
    svg << "    <line x1=\"" << fixed(x, 2) << "\" y1=\"" << fixed(kTop, 2) << "\" x2=\"" << fixed(x, 2) << "\" y2=\""
        << fixed(kTop + kPlotH, 2) << "\"/>\n";
  }
  svg << "  </g>\n"
      << "  <g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n"
      << "    <rect x=\"" << fixed(kLeft, 2) << "\" y=\"" << fixed(kTop, 2) << "\" width=\"" << fixed(kPlotW, 2)
      << "\" height=\"" << fixed(kPlotH, 2) << "\"/>\n"
      << "  </g>\n"
      << "  <g class=\"tick-labels\" fill=\"#000000\">\n";
  for (int k = 0; k <= 10; ++k) {
    svg << "    <text x=\"" << fixed(kLeft - 6.0, 2) << "\" y=\"" << fixed(py(k / 10.0) + 4.0, 2)
        << "\" text-anchor=\"end\">" << fixed(k / 10.0, 1) << "</text>\n";
  }
  for (double v = 0.0; v <= x_max + 0.5 * step; v += step) {
    svg << "    <text x=\"" << fixed(px(v), 2) << "\" y=\"" << fixed(kTop + kPlotH + 16.0, 2)
        << "\" text-anchor=\"middle\">" << fixed(v, 0) << "</text>\n";
  }
  svg << "  </g>\n"
      << "  <text x=\"" << fixed(kLeft + kPlotW / 2.0, 2) << "\" y=\"" << fixed(kHeight - 12.0, 2)
      << "\" text-anchor=\"middle\">False positives</text>\n"
      << "  <text x=\"16\" y=\"" << fixed(kTop + kPlotH / 2.0, 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(kTop + kPlotH / 2.0, 2) << ")\">True positive rate</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % kPalette.size()];
    svg << "  <g class=\"curve\" data-label=\"" << xml_escape(curves[c].label) << "\">\n"
        << "    <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curves[c].curve.points.size(); ++i) {
      const auto& p = curves[c].curve.points[i];
      svg << (i ? " " : "") << fixed(px(static_cast<double>(p.false_positives)), 2) << ','
          << fixed(py(p.true_positive_rate), 2);
    }
    svg << "\"/>\n";
    for (const auto& p : curves[c].curve.points) {
      svg << "    <circle cx=\"" << fixed(px(static_cast<double>(p.false_positives)), 2) << "\" cy=\""
          << fixed(py(p.true_positive_rate), 2) << "\" r=\"2\" fill=\"" << color << "\"/>\n";
    }
    svg << "  </g>\n";
  }

  const double legend_x = kLeft + kPlotW - 200.0;
  const double legend_y = kTop + kPlotH - 12.0 - 18.0 * static_cast<double>(curves.size());
  svg << "  <g class=\"legend\">\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const double y = legend_y + 18.0 * static_cast<double>(c) + 9.0;
    svg << "    <line x1=\"" << fixed(legend_x, 2) << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << fixed(legend_x + 24.0, 2)
        << "\" y2=\"" << fixed(y, 2) << "\" stroke=\"" << kPalette[c % kPalette.size()] << "\" stroke-width=\"2\"/>\n"
        << "    <text x=\"" << fixed(legend_x + 30.0, 2) << "\" y=\"" << fixed(y + 4.0, 2) << "\">"
        << xml_escape(curves[c].label) << "</text>\n";
  }
  svg << "  </g>\n</svg>\n";
  return svg.str();
}

void plot_roc(std::span<const LabeledCurve> curves, const fs::path& out_path) {
  if (curves.empty()) throw std::invalid_argument("plot_roc: at least one curve is required");
  detail::write_file_atomic(out_path, render_roc_svg(curves));
}

}  // namespace facebench
