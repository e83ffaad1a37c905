#pragma once

// Inner-loop kernels shared by the simulator, the equilibrium search and the
// ensemble sampler. Every kernel has a scalar reference implementation; an
// AVX2+FMA variant is selected at runtime when the CPU supports it. Setting
// LTN_KERNELS=scalar in the environment pins the reference path.

#include <cstddef>

namespace ltn::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

struct KernelTable {
  Isa isa;

  /// y = A x for a row-major rows x cols matrix.
  void (*matvec)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y);

  /// out = y + alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, const double* y, double* out);

  /// out_i = min(max(v_i, 0), cap_i); caps may be +inf.
  void (*threshold)(std::size_t n, const double* v, const double* cap, double* out);

  /// Linear-threshold vector field:
  ///   out = (min(max(W x + d, 0), cap) - x) * inv_tau
  void (*lt_field)(const double* w, std::size_t n, const double* x, const double* d,
                   const double* cap, double inv_tau, double* out);

  /// out = x + h6 * (k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(std::size_t n, double h6, const double* x, const double* k1,
                      const double* k2, const double* k3, const double* k4, double* out);

  /// min_i v_i (returns +inf for n == 0).
  double (*min_element)(std::size_t n, const double* v);
};

/// Reference implementation, always available.
const KernelTable& scalar();

/// AVX2 table, or nullptr when not compiled in or unsupported by this CPU.
const KernelTable* avx2();

/// Table used by the library. Chosen once on first use.
const KernelTable& active();

/// Override the active table (tests and benchmarks). Returns false if the
/// requested ISA is unavailable.
bool select(Isa isa);

}  // namespace ltn::kernels
