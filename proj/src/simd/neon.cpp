#include <arm_neon.h>

#include <limits>

#include "backends.hpp"

namespace wharm::simd::detail {
namespace {

constexpr std::size_t kLane = 2;

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 * kLane <= n; i += 2 * kLane) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + kLane), vld1q_f64(b + i + kLane));
  }
  for (; i + kLane <= n; i += kLane) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 * kLane <= n; i += 2 * kLane) {
    acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(a + i + kLane));
  }
  for (; i + kLane <= n; i += kLane) acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i];
  return acc;
}

double sum_squares_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

double max_neon(const double* a, std::size_t n) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  float64x2_t m = vdupq_n_f64(neg_inf);
  std::size_t i = 0;
  for (; i + kLane <= n; i += kLane) m = vmaxq_f64(m, vld1q_f64(a + i));
  double out = vmaxvq_f64(m);
  for (; i < n; ++i) out = a[i] > out ? a[i] : out;
  return out;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLane <= n; i += kLane) {
    vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), alpha));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable neon_table{Backend::neon, dot_neon,  sum_neon,
                             sum_squares_neon, max_neon, axpy_neon};

}  // namespace wharm::simd::detail
