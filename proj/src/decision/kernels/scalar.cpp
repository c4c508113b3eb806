#include "dlacb/decision/kernels.hpp"

namespace dlacb::decision::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) {
      double p = a[i + k] * b[i + k];
      acc[k] = acc[k] + p;
    }
  }
  double s0 = acc[0] + acc[4];
  double s1 = acc[1] + acc[5];
  double s2 = acc[2] + acc[6];
  double s3 = acc[3] + acc[7];
  double t0 = s0 + s2;
  double t1 = s1 + s3;
  double r = t0 + t1;
  for (; i < n; ++i) {
    double p = a[i] * b[i];
    r = r + p;
  }
  return r;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", &dot_scalar, &axpy_scalar};
  return table;
}

}  // namespace dlacb::decision::kernels
