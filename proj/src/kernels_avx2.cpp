#include "cdaloc/kernels.hpp"

#if defined(CDALOC_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>

#define CDALOC_AVX2 __attribute__((target("avx2")))

namespace cdaloc::kernels::avx2 {

CDALOC_AVX2
void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out) {
  const std::size_t n = xs.size();
  const __m256d ax = _mm256_set1_pd(anchor.x);
  const __m256d ay = _mm256_set1_pd(anchor.y);
  const __m256d r = _mm256_set1_pd(range);
  const __m256d sign = _mm256_set1_pd(-0.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs.data() + i), ax);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys.data() + i), ay);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d res = _mm256_sub_pd(_mm256_sqrt_pd(d2), r);
    _mm256_storeu_pd(out.data() + i, _mm256_andnot_pd(sign, res));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - anchor.x;
    const double dy = ys[i] - anchor.y;
    out[i] = std::abs(std::sqrt(dx * dx + dy * dy) - range);
  }
}

CDALOC_AVX2
double squared_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace cdaloc::kernels::avx2

#endif
