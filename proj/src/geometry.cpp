#include "plkit/geometry.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "plkit/errors.hpp"
#include "plkit/format.hpp"

namespace plkit {

Box::Box(double x1_, double y1_, double x2_, double y2_)
    : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
  std::vector<std::string> violations;
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
        std::isfinite(y2))) {
    violations.push_back("box has non-finite coordinates");
  } else {
    if (x2 < x1) {
      violations.push_back("box has negative width: x1=" + format_double(x1) +
                           " x2=" + format_double(x2));
    }
    if (y2 < y1) {
      violations.push_back("box has negative height: y1=" + format_double(y1) +
                           " y2=" + format_double(y2));
    }
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

Box Box::from_xywh(double x, double y, double w, double h) {
  return Box(x, y, x + w, y + h);
}

double area(const Box& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

double intersection_area(const Box& a, const Box& b) {
  const double ix1 = a.x1 < b.x1 ? b.x1 : a.x1;
  const double iy1 = a.y1 < b.y1 ? b.y1 : a.y1;
  const double ix2 = a.x2 < b.x2 ? a.x2 : b.x2;
  const double iy2 = a.y2 < b.y2 ? a.y2 : b.y2;
  const double iw = ix2 - ix1 > 0.0 ? ix2 - ix1 : 0.0;
  const double ih = iy2 - iy1 > 0.0 ? iy2 - iy1 : 0.0;
  return iw * ih;
}

double iou(const Box& a, const Box& b) {
  return detail::iou_coords(a.x1, a.y1, a.x2, a.y2, b.x1, b.y1, b.x2, b.y2);
}

}  // namespace plkit
