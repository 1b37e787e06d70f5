#pragma once

// Data-parallel inner loops with a scalar reference implementation and SIMD
// variants (AVX2 on x86-64, NEON on AArch64). The variant is picked once at
// runtime from CPU features; CDA_LOC_SIMD=scalar forces the reference path.
//
// abs_range_residuals is bit-identical across variants (only IEEE add, mul,
// sqrt and abs are used, with FMA contraction disabled). squared_distance
// reduces in a different order per variant and agrees to rounding.

#include <span>

#include "cdaloc/geom.hpp"

namespace cdaloc::kernels {

enum class Isa { Scalar, Avx2, Neon };

const char* isa_name(Isa isa);

/// True when this binary carries `isa` and the running CPU supports it.
bool isa_available(Isa isa);

/// Best available variant, honoring CDA_LOC_SIMD (scalar|avx2|neon). Resolved
/// once per process.
Isa active_isa();

/// out[i] = | hypot(xs[i] - anchor.x, ys[i] - anchor.y) - range |
void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out,
                         Isa isa = active_isa());

/// Sum of squared component differences. a and b must have equal length.
double squared_distance(std::span<const double> a, std::span<const double> b,
                        Isa isa = active_isa());

namespace scalar {
void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out);
double squared_distance(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CDALOC_HAVE_AVX2_KERNELS 1
namespace avx2 {
void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out);
double squared_distance(std::span<const double> a, std::span<const double> b);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define CDALOC_HAVE_NEON_KERNELS 1
namespace neon {
void abs_range_residuals(std::span<const double> xs, std::span<const double> ys,
                         Point2D anchor, double range, std::span<double> out);
double squared_distance(std::span<const double> a, std::span<const double> b);
}  // namespace neon
#endif

}  // namespace cdaloc::kernels
