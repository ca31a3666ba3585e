#pragma once

#include <cstddef>
#include <cstdint>

#include "plkit/geometry.hpp"

// Per-element reference sequences shared by the scalar kernel table and the
// SIMD tables' tail loops. Any change here changes the contract every SIMD
// lane must reproduce bit-for-bit.

namespace plkit::kernels::detail {

inline double ref_iou(double qx1, double qy1, double qx2, double qy2,
                      double x1, double y1, double x2, double y2) {
  return plkit::detail::iou_coords(qx1, qy1, qx2, qy2, x1, y1, x2, y2);
}

inline double ref_area(double x1, double y1, double x2, double y2) {
  return (x2 - x1) * (y2 - y1);
}

inline double ref_clamp(double v, double lo, double hi) {
  const double t = v < lo ? lo : v;
  return t > hi ? hi : t;
}

inline double ref_select_product(std::uint32_t mask, const double* on,
                                 const double* off, int terms) {
  double acc = 1.0;
  for (int j = 0; j < terms; ++j) {
    acc = acc * (((mask >> j) & 1u) ? on[j] : off[j]);
  }
  return acc;
}

inline double ref_select_sum(std::uint32_t mask, const double* on,
                             const double* off, int terms) {
  double acc = 0.0;
  for (int j = 0; j < terms; ++j) {
    acc = acc + (((mask >> j) & 1u) ? on[j] : off[j]);
  }
  return acc;
}

}  // namespace plkit::kernels::detail
