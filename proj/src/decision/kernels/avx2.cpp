#include "dlacb/decision/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define DLACB_HAVE_AVX2_KERNELS 1
#endif

namespace dlacb::decision::kernels {

#if DLACB_HAVE_AVX2_KERNELS
namespace {

__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b,
                                                std::size_t n) {
  __m256d lo = _mm256_setzero_pd();  // lanes 0..3
  __m256d hi = _mm256_setzero_pd();  // lanes 4..7
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  __m256d s = _mm256_add_pd(lo, hi);  // s0 s1 s2 s3
  __m128d t = _mm_add_pd(_mm256_castpd256_pd128(s), _mm256_extractf128_pd(s, 1));  // s0+s2, s1+s3
  double r = _mm_cvtsd_f64(_mm_add_sd(t, _mm_unpackhi_pd(t, t)));
  for (; i < n; ++i) {
    double p = a[i] * b[i];
    r = r + p;
  }
  return r;
}

__attribute__((target("avx2"))) void axpy_avx2(double alpha, const double* x, double* y,
                                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) {
    double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

}  // namespace

const KernelTable* avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{"avx2", &dot_avx2, &axpy_avx2};
  return supported ? &table : nullptr;
}
#else
const KernelTable* avx2() { return nullptr; }
#endif

}  // namespace dlacb::decision::kernels
