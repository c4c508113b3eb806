#pragma once

// Dense-layer inner loops with a scalar reference and SIMD variants picked at
// runtime. Every variant reproduces the reference bit for bit: dot products
// accumulate into eight interleaved partial sums (lane k takes elements
// i = k mod 8), reduce as ((s0+s2)+(s1+s3)) with s_k = acc_k + acc_{k+4}, then
// add the tail sequentially. No fused multiply-add anywhere. This keeps model
// scores identical on every validator regardless of CPU.

#include <cstddef>
#include <string_view>
#include <vector>

namespace dlacb::decision::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar();
// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2();
const KernelTable* neon();

// All variants usable on this machine, scalar first.
std::vector<const KernelTable*> available();

// Selected once: DLACB_KERNELS=scalar|avx2|neon forces a variant, otherwise
// the best supported one.
const KernelTable& active();

}  // namespace dlacb::decision::kernels
