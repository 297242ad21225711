#include "facebench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "facebench/errors.hpp"

namespace facebench {

BoundingBox::BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
    throw GeometryError("bounding box fields must be finite");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    throw GeometryError("bounding box width and height must be positive");
  }
  if (!std::isfinite(x + w) || !std::isfinite(y + h)) {
    throw GeometryError("bounding box extent overflows");
  }
}

EllipseRegion::EllipseRegion(double cx, double cy, double major, double minor, double theta)
    : cx_(cx), cy_(cy), major_(major), minor_(minor), theta_(theta) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(major) || !std::isfinite(minor) ||
      !std::isfinite(theta)) {
    throw GeometryError("ellipse fields must be finite");
  }
  if (!(minor > 0.0) || major < minor) {
    throw GeometryError("ellipse axes must satisfy major >= minor > 0");
  }
}

Detection::Detection(BoundingBox box_, double score_) : box(box_), score(score_) {
  if (!std::isfinite(score_)) {
    throw GeometryError("detection score must be finite");
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  // Areas come from the same edge differences as the intersection so that
  // identical boxes give exactly 1.
  const double area_a = (a.right() - a.x()) * (a.bottom() - a.y());
  const double area_b = (b.right() - b.x()) * (b.bottom() - b.y());
  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) {
    return a == b ? 1.0 : 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox ellipse_to_bbox(const EllipseRegion& e) {
  const double c = std::cos(e.theta());
  const double s = std::sin(e.theta());
  const double a2 = e.major() * e.major();
  const double b2 = e.minor() * e.minor();
  const double half_w = std::sqrt(a2 * c * c + b2 * s * s);
  const double half_h = std::sqrt(a2 * s * s + b2 * c * c);
  return BoundingBox(e.cx() - half_w, e.cy() - half_h, 2.0 * half_w, 2.0 * half_h);
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("nms: iou_threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return dets[l].score > dets[r].score; });

  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (suppressed[order[i]]) continue;
    const Detection& best = dets[order[i]];
    kept.push_back(best);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!suppressed[order[j]] && iou(best.box, dets[order[j]].box) >= iou_threshold) {
        suppressed[order[j]] = true;
      }
    }
  }
  return kept;
}

std::optional<BoundingBox> clip_to_frame(const BoundingBox& box, double frame_w, double frame_h) {
  if (!(frame_w > 0.0) || !(frame_h > 0.0)) {
    throw std::invalid_argument("clip_to_frame: frame dimensions must be positive");
  }
  const double left = std::max(box.x(), 0.0);
  const double top = std::max(box.y(), 0.0);
  const double right = std::min(box.right(), frame_w);
  const double bottom = std::min(box.bottom(), frame_h);
  if (!(right - left > 0.0) || !(bottom - top > 0.0)) {
    return std::nullopt;
  }
  return BoundingBox(left, top, right - left, bottom - top);
}

}  // namespace facebench
