#pragma once

#include <cstddef>

namespace cklab::kernels {

/// Hot inner-loop kernels over flat arrays (SoA layout).
///
/// Two implementations exist: a scalar reference and an AVX2 variant, selected
/// once at runtime from CPU capabilities. The elementwise kernels use only
/// IEEE-exact operations (+,-,*,/,sqrt, no FMA) so both variants return
/// bit-identical outputs; the reductions differ only in association order.
/// Set CKLAB_KERNELS=scalar|avx2 to force a backend.
struct Table {
  // Reductions. sum/dot use pairwise (tree) accumulation so results do not
  // depend on any scheduling and error grows like log(n).
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sup_abs)(const double* x, std::size_t n);

  // y <- a*x + b*y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);

  // out[i] = sqrt(1 + lam[i]^2), the per-eigenvalue Lagrangian radius factor.
  void (*radius_terms)(const double* lam, double* out, std::size_t n);

  // out[i] = |lam*v - u|^2 / (1 + lam^2) for complex u, v given as re/im.
  void (*square_form_terms)(const double* lam, const double* ure,
                            const double* uim, const double* vre,
                            const double* vim, double* out, std::size_t n);

  // Determinant of 2x2 Hermitian matrices: h11*h22 - |h12|^2.
  void (*det2_herm)(const double* h11, const double* h22, const double* h12re,
                    const double* h12im, double* out, std::size_t n);

  // Eigenvalues of the Hermitian-definite pencil det(B - lam*G) = 0 for 2x2
  // blocks, G positive-definite. lo <= hi.
  void (*eig2_pencil)(const double* g11, const double* g22,
                      const double* g12re, const double* g12im,
                      const double* b11, const double* b22,
                      const double* b12re, const double* b12im, double* lo,
                      double* hi, std::size_t n);

  const char* name;
};

/// The runtime-selected table.
const Table& active();

/// Reference implementation, always available.
const Table& scalar_table();

/// AVX2 implementation, or nullptr when the build or the CPU lacks it.
const Table* avx2_table();

// Convenience forwarders through the active table.
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline double sup_abs(const double* x, std::size_t n) {
  return active().sup_abs(x, n);
}

}  // namespace cklab::kernels
