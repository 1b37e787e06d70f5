#include "cdaloc/kernels.hpp"

#if defined(CDALOC_HAVE_NEON_KERNELS)

#include <arm_neon.h>

#include <cmath>

namespace cdaloc::kernels::neon {

void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out) {
  const std::size_t n = xs.size();
  const float64x2_t ax = vdupq_n_f64(anchor.x);
  const float64x2_t ay = vdupq_n_f64(anchor.y);
  const float64x2_t r = vdupq_n_f64(range);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(xs.data() + i), ax);
    const float64x2_t dy = vsubq_f64(vld1q_f64(ys.data() + i), ay);
    const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
    vst1q_f64(out.data() + i, vabsq_f64(vsubq_f64(vsqrtq_f64(d2), r)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - anchor.x;
    const double dy = ys[i] - anchor.y;
    out[i] = std::abs(std::sqrt(dx * dx + dy * dy) - range);
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a.data() + i + 2), vld1q_f64(b.data() + i + 2));
    acc0 = vaddq_f64(acc0, vmulq_f64(d0, d0));
    acc1 = vaddq_f64(acc1, vmulq_f64(d1, d1));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace cdaloc::kernels::neon

#endif
