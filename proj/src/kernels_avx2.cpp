// AVX2 kernel table. Every lane mirrors the exact IEEE operation sequence of
// kernel_ref.hpp; conditional selects use cmp+blendv rather than min/max so
// tie and signed-zero behavior matches the scalar ternaries bit-for-bit.
// Compiled with -mavx2 only in this translation unit; -ffp-contract=off
// keeps the compiler from fusing the explicit mul/add pairs.

#include <immintrin.h>

#include "plkit/detail/kernel_ref.hpp"
#include "plkit/detail/kernel_tables.hpp"

namespace plkit::kernels::detail {
namespace {

inline __m256d select_lt(__m256d a, __m256d b, __m256d if_lt, __m256d if_ge) {
  // a < b ? if_lt : if_ge
  return _mm256_blendv_pd(if_ge, if_lt, _mm256_cmp_pd(a, b, _CMP_LT_OQ));
}

inline __m256d select_gt(__m256d a, __m256d b, __m256d if_gt, __m256d if_le) {
  return _mm256_blendv_pd(if_le, if_gt, _mm256_cmp_pd(a, b, _CMP_GT_OQ));
}

void iou_one_vs_many(double qx1, double qy1, double qx2, double qy2,
                     const double* x1, const double* y1, const double* x2,
                     const double* y2, std::size_t n, double* out) {
  const __m256d vqx1 = _mm256_set1_pd(qx1);
  const __m256d vqy1 = _mm256_set1_pd(qy1);
  const __m256d vqx2 = _mm256_set1_pd(qx2);
  const __m256d vqy2 = _mm256_set1_pd(qy2);
  const __m256d vqa = _mm256_set1_pd((qx2 - qx1) * (qy2 - qy1));
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx1 = _mm256_loadu_pd(x1 + i);
    const __m256d vy1 = _mm256_loadu_pd(y1 + i);
    const __m256d vx2 = _mm256_loadu_pd(x2 + i);
    const __m256d vy2 = _mm256_loadu_pd(y2 + i);
    const __m256d ix1 = select_lt(vqx1, vx1, vx1, vqx1);
    const __m256d iy1 = select_lt(vqy1, vy1, vy1, vqy1);
    const __m256d ix2 = select_lt(vqx2, vx2, vqx2, vx2);
    const __m256d iy2 = select_lt(vqy2, vy2, vqy2, vy2);
    const __m256d dw = _mm256_sub_pd(ix2, ix1);
    const __m256d dh = _mm256_sub_pd(iy2, iy1);
    const __m256d iw = select_gt(dw, zero, dw, zero);
    const __m256d ih = select_gt(dh, zero, dh, zero);
    const __m256d inter = _mm256_mul_pd(iw, ih);
    const __m256d vba = _mm256_mul_pd(_mm256_sub_pd(vx2, vx1),
                                      _mm256_sub_pd(vy2, vy1));
    const __m256d uni = _mm256_sub_pd(_mm256_add_pd(vqa, vba), inter);
    const __m256d q = _mm256_div_pd(inter, uni);
    _mm256_storeu_pd(out + i, select_gt(uni, zero, q, zero));
  }
  for (; i < n; ++i) {
    out[i] = ref_iou(qx1, qy1, qx2, qy2, x1[i], y1[i], x2[i], y2[i]);
  }
}

void area_many(const double* x1, const double* y1, const double* x2,
               const double* y2, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w = _mm256_sub_pd(_mm256_loadu_pd(x2 + i),
                                    _mm256_loadu_pd(x1 + i));
    const __m256d h = _mm256_sub_pd(_mm256_loadu_pd(y2 + i),
                                    _mm256_loadu_pd(y1 + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(w, h));
  }
  for (; i < n; ++i) out[i] = ref_area(x1[i], y1[i], x2[i], y2[i]);
}

void mul_many(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void clamp_many(const double* v, double lo, double hi, std::size_t n,
                double* out) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vv = _mm256_loadu_pd(v + i);
    const __m256d t = select_lt(vv, vlo, vlo, vv);
    _mm256_storeu_pd(out + i, select_gt(t, vhi, vhi, t));
  }
  for (; i < n; ++i) out[i] = ref_clamp(v[i], lo, hi);
}

template <bool Product>
void select_accumulate(std::uint32_t base, std::size_t count, const double* on,
                       const double* off, int terms, double* out) {
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256i m = _mm256_add_epi64(
        _mm256_set1_epi64x(static_cast<long long>(base + i)), lane);
    __m256d acc = Product ? _mm256_set1_pd(1.0) : _mm256_setzero_pd();
    for (int j = 0; j < terms; ++j) {
      const __m256i bit = _mm256_set1_epi64x(1ll << j);
      const __m256i isset = _mm256_cmpeq_epi64(_mm256_and_si256(m, bit), bit);
      const __m256d term = _mm256_blendv_pd(_mm256_set1_pd(off[j]),
                                            _mm256_set1_pd(on[j]),
                                            _mm256_castsi256_pd(isset));
      acc = Product ? _mm256_mul_pd(acc, term) : _mm256_add_pd(acc, term);
    }
    _mm256_storeu_pd(out + i, acc);
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

const Ops& avx2_table() {
  static const Ops table{iou_one_vs_many, area_many,           mul_many,
                         clamp_many,      select_product_many, select_sum_many};
  return table;
}

}  // namespace plkit::kernels::detail
