// NEON kernel table, two lanes wide. Mirrors kernel_ref.hpp the same way the
// AVX2 table does: conditional selects are cmp+bsl so every lane runs the
// scalar ternary sequence exactly.

#include <arm_neon.h>

#include "plkit/detail/kernel_ref.hpp"
#include "plkit/detail/kernel_tables.hpp"

namespace plkit::kernels::detail {
namespace {

inline float64x2_t select_lt(float64x2_t a, float64x2_t b, float64x2_t if_lt,
                             float64x2_t if_ge) {
  return vbslq_f64(vcltq_f64(a, b), if_lt, if_ge);
}

inline float64x2_t select_gt(float64x2_t a, float64x2_t b, float64x2_t if_gt,
                             float64x2_t if_le) {
  return vbslq_f64(vcgtq_f64(a, b), if_gt, if_le);
}

void iou_one_vs_many(double qx1, double qy1, double qx2, double qy2,
                     const double* x1, const double* y1, const double* x2,
                     const double* y2, std::size_t n, double* out) {
  const float64x2_t vqx1 = vdupq_n_f64(qx1);
  const float64x2_t vqy1 = vdupq_n_f64(qy1);
  const float64x2_t vqx2 = vdupq_n_f64(qx2);
  const float64x2_t vqy2 = vdupq_n_f64(qy2);
  const float64x2_t vqa = vdupq_n_f64((qx2 - qx1) * (qy2 - qy1));
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx1 = vld1q_f64(x1 + i);
    const float64x2_t vy1 = vld1q_f64(y1 + i);
    const float64x2_t vx2 = vld1q_f64(x2 + i);
    const float64x2_t vy2 = vld1q_f64(y2 + i);
    const float64x2_t ix1 = select_lt(vqx1, vx1, vx1, vqx1);
    const float64x2_t iy1 = select_lt(vqy1, vy1, vy1, vqy1);
    const float64x2_t ix2 = select_lt(vqx2, vx2, vqx2, vx2);
    const float64x2_t iy2 = select_lt(vqy2, vy2, vqy2, vy2);
    const float64x2_t dw = vsubq_f64(ix2, ix1);
    const float64x2_t dh = vsubq_f64(iy2, iy1);
    const float64x2_t iw = select_gt(dw, zero, dw, zero);
    const float64x2_t ih = select_gt(dh, zero, dh, zero);
    const float64x2_t inter = vmulq_f64(iw, ih);
    const float64x2_t vba = vmulq_f64(vsubq_f64(vx2, vx1),
                                      vsubq_f64(vy2, vy1));
    const float64x2_t uni = vsubq_f64(vaddq_f64(vqa, vba), inter);
    const float64x2_t q = vdivq_f64(inter, uni);
    vst1q_f64(out + i, select_gt(uni, zero, q, zero));
  }
  for (; i < n; ++i) {
    out[i] = ref_iou(qx1, qy1, qx2, qy2, x1[i], y1[i], x2[i], y2[i]);
  }
}

void area_many(const double* x1, const double* y1, const double* x2,
               const double* y2, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t w = vsubq_f64(vld1q_f64(x2 + i), vld1q_f64(x1 + i));
    const float64x2_t h = vsubq_f64(vld1q_f64(y2 + i), vld1q_f64(y1 + i));
    vst1q_f64(out + i, vmulq_f64(w, h));
  }
  for (; i < n; ++i) out[i] = ref_area(x1[i], y1[i], x2[i], y2[i]);
}

void mul_many(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void clamp_many(const double* v, double lo, double hi, std::size_t n,
                double* out) {
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vv = vld1q_f64(v + i);
    const float64x2_t t = select_lt(vv, vlo, vlo, vv);
    vst1q_f64(out + i, select_gt(t, vhi, vhi, t));
  }
  for (; i < n; ++i) out[i] = ref_clamp(v[i], lo, hi);
}

template <bool Product>
void select_accumulate(std::uint32_t base, std::size_t count, const double* on,
                       const double* off, int terms, double* out) {
  const uint64x2_t lane = {0, 1};
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    const uint64x2_t m = vaddq_u64(vdupq_n_u64(base + i), lane);
    float64x2_t acc = vdupq_n_f64(Product ? 1.0 : 0.0);
    for (int j = 0; j < terms; ++j) {
      const uint64x2_t bit = vdupq_n_u64(1ull << j);
      const uint64x2_t isset = vceqq_u64(vandq_u64(m, bit), bit);
      const float64x2_t term =
          vbslq_f64(isset, vdupq_n_f64(on[j]), vdupq_n_f64(off[j]));
      acc = Product ? vmulq_f64(acc, term) : vaddq_f64(acc, term);
    }
    vst1q_f64(out + i, acc);
  }
  for (; i < count; ++i) {
    const std::uint32_t m = base + static_cast<std::uint32_t>(i);
    out[i] = Product ? ref_select_product(m, on, off, terms)
                     : ref_select_sum(m, on, off, terms);
  }
}

void select_product_many(std::uint32_t base, std::size_t count,
                         const double* on, const double* off, int terms,
                         double* out) {
  select_accumulate<true>(base, count, on, off, terms, out);
}

void select_sum_many(std::uint32_t base, std::size_t count, const double* on,
                     const double* off, int terms, double* out) {
  select_accumulate<false>(base, count, on, off, terms, out);
}

}  // namespace

const Ops& neon_table() {
  static const Ops table{iou_one_vs_many, area_many,           mul_many,
                         clamp_many,      select_product_many, select_sum_many};
  return table;
}

}  // namespace plkit::kernels::detail
