#include "dlacb/decision/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#define DLACB_HAVE_NEON_KERNELS 1
#endif

namespace dlacb::decision::kernels {

#if DLACB_HAVE_NEON_KERNELS
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t v0 = vdupq_n_f64(0.0);  // lanes 0,1
  float64x2_t v1 = vdupq_n_f64(0.0);  // lanes 2,3
  float64x2_t v2 = vdupq_n_f64(0.0);  // lanes 4,5
  float64x2_t v3 = vdupq_n_f64(0.0);  // lanes 6,7
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    v0 = vaddq_f64(v0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    v1 = vaddq_f64(v1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    v2 = vaddq_f64(v2, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
    v3 = vaddq_f64(v3, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
  }
  float64x2_t s01 = vaddq_f64(v0, v2);
  float64x2_t s23 = vaddq_f64(v1, v3);
  float64x2_t t = vaddq_f64(s01, s23);
  double r = vgetq_lane_f64(t, 0) + vgetq_lane_f64(t, 1);
  for (; i < n; ++i) {
    double p = a[i] * b[i];
    r = r + p;
  }
  return r;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t p = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), p));
  }
  for (; i < n; ++i) {
    double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

}  // namespace

const KernelTable* neon() {
  static const KernelTable table{"neon", &dot_neon, &axpy_neon};
  return &table;
}
#else
const KernelTable* neon() { return nullptr; }
#endif

}  // namespace dlacb::decision::kernels
