// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma;
// nothing in it may run before the CPU check in avx2().

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "ltn/kernels.hpp"

namespace ltn::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double dot(const double* a, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(x + j), acc);
  double s = hsum(acc);
  for (; j < n; ++j) s += a[j] * x[j];
  return s;
}

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot(a + i * cols, x, cols);
}

void axpy(std::size_t n, double alpha, const double* x, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = y[i] + alpha * x[i];
}

void threshold(std::size_t n, const double* v, const double* cap, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_max_pd(_mm256_loadu_pd(v + i), zero);
    _mm256_storeu_pd(out + i, _mm256_min_pd(c, _mm256_loadu_pd(cap + i)));
  }
  for (; i < n; ++i) out[i] = std::min(std::max(v[i], 0.0), cap[i]);
}

void lt_field(const double* w, std::size_t n, const double* x, const double* d,
              const double* cap, double inv_tau, double* out) {
  // Four rows at a time: the row dot products are formed lane-wise so the
  // clamp and the -x update vectorize across rows.
  std::size_t i = 0;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vt = _mm256_set1_pd(inv_tau);
  for (; i + 4 <= n; i += 4) {
    alignas(32) double s[4];
    for (std::size_t k = 0; k < 4; ++k) s[k] = dot(w + (i + k) * n, x, n);
    __m256d net = _mm256_add_pd(_mm256_load_pd(s), _mm256_loadu_pd(d + i));
    net = _mm256_min_pd(_mm256_max_pd(net, zero), _mm256_loadu_pd(cap + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(net, _mm256_loadu_pd(x + i)), vt));
  }
  for (; i < n; ++i) {
    const double s = dot(w + i * n, x, n) + d[i];
    out[i] = (std::min(std::max(s, 0.0), cap[i]) - x[i]) * inv_tau;
  }
}

void rk4_combine(std::size_t n, double h6, const double* x, const double* k1, const double* k2,
                 const double* k3, const double* k4, double* out) {
  const __m256d vh = _mm256_set1_pd(h6);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    acc = _mm256_fmadd_pd(two, _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i)),
                          acc);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vh, acc, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double min_element(std::size_t n, const double* v) {
  double m = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(v + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    m = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  }
  for (; i < n; ++i) m = std::min(m, v[i]);
  return m;
}

constexpr KernelTable kAvx2{Isa::Avx2, matvec, axpy, threshold,
                            lt_field,  rk4_combine, min_element};

}  // namespace

const KernelTable* avx2() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace ltn::kernels
