#pragma once

namespace plkit {

// Axis-aligned box in pixel coordinates, corner convention: (x1,y1) top-left
// inclusive, (x2,y2) bottom-right exclusive. Zero-area boxes are valid;
// negative extents and non-finite coordinates are rejected at construction.
struct Box {
  double x1;
  double y1;
  double x2;
  double y2;

  Box(double x1, double y1, double x2, double y2);
  static Box from_xywh(double x, double y, double w, double h);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }

  bool operator==(const Box&) const = default;
};

double area(const Box& b);
double intersection_area(const Box& a, const Box& b);

// Intersection over union, in [0,1]. Defined as 0 when the union has zero
// area so callers never see NaN.
double iou(const Box& a, const Box& b);

namespace detail {

// Shared per-pair IoU sequence. The scalar kernel and every SIMD lane run
// exactly these operations in this order, so results agree bit-for-bit.
inline double iou_coords(double ax1, double ay1, double ax2, double ay2,
                         double bx1, double by1, double bx2, double by2) {
  const double ix1 = ax1 < bx1 ? bx1 : ax1;
  const double iy1 = ay1 < by1 ? by1 : ay1;
  const double ix2 = ax2 < bx2 ? ax2 : bx2;
  const double iy2 = ay2 < by2 ? ay2 : by2;
  const double iw = ix2 - ix1 > 0.0 ? ix2 - ix1 : 0.0;
  const double ih = iy2 - iy1 > 0.0 ? iy2 - iy1 : 0.0;
  const double inter = iw * ih;
  const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace detail
}  // namespace plkit
