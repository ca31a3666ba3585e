#include "plkit/detail/kernel_ref.hpp"
#include "plkit/detail/kernel_tables.hpp"

namespace plkit::kernels::detail {
namespace {

void iou_one_vs_many(double qx1, double qy1, double qx2, double qy2,
                     const double* x1, const double* y1, const double* x2,
                     const double* y2, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ref_iou(qx1, qy1, qx2, qy2, x1[i], y1[i], x2[i], y2[i]);
  }
}

void area_many(const double* x1, const double* y1, const double* x2,
               const double* y2, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ref_area(x1[i], y1[i], x2[i], y2[i]);
  }
}

void mul_many(const double* a, const double* b, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void clamp_many(const double* v, double lo, double hi, std::size_t n,
                double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = ref_clamp(v[i], lo, hi);
}

void select_product_many(std::uint32_t base, std::size_t count,
                         const double* on, const double* off, int terms,
                         double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = ref_select_product(base + static_cast<std::uint32_t>(i), on, off,
                                terms);
  }
}

void select_sum_many(std::uint32_t base, std::size_t count, const double* on,
                     const double* off, int terms, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = ref_select_sum(base + static_cast<std::uint32_t>(i), on, off,
                            terms);
  }
}

}  // namespace

const Ops& scalar_table() {
  static const Ops table{iou_one_vs_many, area_many,           mul_many,
                         clamp_many,      select_product_many, select_sum_many};
  return table;
}

}  // namespace plkit::kernels::detail
