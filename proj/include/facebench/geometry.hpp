#pragma once

#include <optional>
#include <span>
#include <vector>

namespace facebench {

/// Axis-aligned rectangle in continuous pixel coordinates. Origin is the
/// top-left corner, x grows rightward and y downward. Width and height are
/// strictly positive and every field is finite; the constructor throws
/// GeometryError otherwise.
class BoundingBox {
 public:
  BoundingBox(double x, double y, double w, double h);

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double right() const { return x_ + w_; }
  double bottom() const { return y_ + h_; }
  double area() const { return w_ * h_; }

  bool operator==(const BoundingBox&) const = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

/// Rotated ellipse as used by FDDB ground truth. `theta` is the angle of the
/// major axis, radians counterclockwise from the x-axis. Requires a >= b > 0.
class EllipseRegion {
 public:
  EllipseRegion(double cx, double cy, double major, double minor, double theta);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double major() const { return major_; }
  double minor() const { return minor_; }
  double theta() const { return theta_; }

 private:
  double cx_;
  double cy_;
  double major_;
  double minor_;
  double theta_;
};

struct Detection {
  Detection(BoundingBox box, double score);

  BoundingBox box;
  double score;

  bool operator==(const Detection&) const = default;
};

/// Intersection over union with continuous areas. Exactly 1 for identical
/// boxes, exactly 0 for boxes whose interiors do not overlap, symmetric.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Tightest axis-aligned box around the rotated ellipse.
BoundingBox ellipse_to_bbox(const EllipseRegion& e);

/// Greedy non-maximum suppression. Keeps the best remaining detection (ties
/// broken by input order) and drops everything overlapping it at IOU >=
/// `iou_threshold`. Output is in descending score order.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// Intersection with [0, frame_w] x [0, frame_h]; nullopt when nothing with
/// positive area remains.
std::optional<BoundingBox> clip_to_frame(const BoundingBox& box, double frame_w, double frame_h);

}  // namespace facebench
