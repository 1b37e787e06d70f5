#include "cdaloc/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace cdaloc::kernels {

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(CDALOC_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(CDALOC_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa resolve_isa() {
  if (const char* env = std::getenv("CDA_LOC_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
    if (want == "neon" && isa_available(Isa::Neon)) return Isa::Neon;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

void check_sizes(std::span<const double> xs, std::span<const double> ys, std::span<double> out) {
  if (xs.size() != ys.size() || xs.size() != out.size()) {
    throw std::invalid_argument("abs_range_residuals: span size mismatch");
  }
}

}  // namespace

Isa active_isa() {
  static const Isa isa = resolve_isa();
  return isa;
}

namespace scalar {

void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - anchor.x;
    const double dy = ys[i] - anchor.y;
    out[i] = std::abs(std::sqrt(dx * dx + dy * dy) - range);
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace scalar

void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out, Isa isa) {
  check_sizes(xs, ys, out);
  switch (isa) {
#if defined(CDALOC_HAVE_AVX2_KERNELS)
    case Isa::Avx2: return avx2::abs_range_residuals(xs, ys, anchor, range, out);
#endif
#if defined(CDALOC_HAVE_NEON_KERNELS)
    case Isa::Neon: return neon::abs_range_residuals(xs, ys, anchor, range, out);
#endif
    default: return scalar::abs_range_residuals(xs, ys, anchor, range, out);
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b, Isa isa) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("squared_distance: length mismatch");
  }
  switch (isa) {
#if defined(CDALOC_HAVE_AVX2_KERNELS)
    case Isa::Avx2: return avx2::squared_distance(a, b);
#endif
#if defined(CDALOC_HAVE_NEON_KERNELS)
    case Isa::Neon: return neon::squared_distance(a, b);
#endif
    default: return scalar::squared_distance(a, b);
  }
}

}  // namespace cdaloc::kernels
