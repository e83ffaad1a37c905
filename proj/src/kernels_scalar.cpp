#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <limits>

#include "ltn/kernels.hpp"

namespace ltn::kernels {

namespace {

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* r = a + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

void axpy(std::size_t n, double alpha, const double* x, const double* y, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + alpha * x[i];
}

void threshold(std::size_t n, const double* v, const double* cap, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(std::max(v[i], 0.0), cap[i]);
}

void lt_field(const double* w, std::size_t n, const double* x, const double* d,
              const double* cap, double inv_tau, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = w + i * n;
    double s = d[i];
    for (std::size_t j = 0; j < n; ++j) s += r[j] * x[j];
    out[i] = (std::min(std::max(s, 0.0), cap[i]) - x[i]) * inv_tau;
  }
}

void rk4_combine(std::size_t n, double h6, const double* x, const double* k1, const double* k2,
                 const double* k3, const double* k4, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double min_element(std::size_t n, const double* v) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::min(m, v[i]);
  return m;
}

constexpr KernelTable kScalar{Isa::Scalar, matvec, axpy, threshold,
                              lt_field,    rk4_combine, min_element};

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* pick_default() {
  if (const char* env = std::getenv("LTN_KERNELS"); env && std::strcmp(env, "scalar") == 0)
    return &kScalar;
  if (const KernelTable* t = avx2()) return t;
  return &kScalar;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar() { return kScalar; }

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select(Isa isa) {
  if (isa == Isa::Scalar) {
    g_active.store(&kScalar);
    return true;
  }
  const KernelTable* t = avx2();
  if (!t) return false;
  g_active.store(t);
  return true;
}

#if !defined(LTN_HAVE_AVX2)
const KernelTable* avx2() { return nullptr; }
#endif

}  // namespace ltn::kernels
