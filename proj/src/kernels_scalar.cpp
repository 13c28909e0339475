#include <cmath>
#include <cstddef>

#include "cklab/kernels.hpp"

namespace cklab::kernels {
namespace {

constexpr std::size_t kPairwiseBase = 32;

double sum_scalar(const double* x, std::size_t n) {
  if (n <= kPairwiseBase) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t h = n / 2;
  return sum_scalar(x, h) + sum_scalar(x + h, n - h);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  if (n <= kPairwiseBase) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
  }
  const std::size_t h = n / 2;
  return dot_scalar(x, y, h) + dot_scalar(x + h, y + h, n - h);
}

double sup_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void axpby_scalar(double a, const double* x, double b, double* y,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void radius_terms_scalar(const double* lam, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(1.0 + lam[i] * lam[i]);
}

void square_form_terms_scalar(const double* lam, const double* ure,
                              const double* uim, const double* vre,
                              const double* vim, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = lam[i] * vre[i] - ure[i];
    const double im = lam[i] * vim[i] - uim[i];
    out[i] = (re * re + im * im) / (1.0 + lam[i] * lam[i]);
  }
}

void det2_herm_scalar(const double* h11, const double* h22, const double* h12re,
                      const double* h12im, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = h11[i] * h22[i] - (h12re[i] * h12re[i] + h12im[i] * h12im[i]);
  }
}

void eig2_pencil_scalar(const double* g11, const double* g22,
                        const double* g12re, const double* g12im,
                        const double* b11, const double* b22,
                        const double* b12re, const double* b12im, double* lo,
                        double* hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double detg = g11[i] * g22[i] - (g12re[i] * g12re[i] + g12im[i] * g12im[i]);
    const double detb = b11[i] * b22[i] - (b12re[i] * b12re[i] + b12im[i] * b12im[i]);
    const double mix = 0.5 * (g11[i] * b22[i] + g22[i] * b11[i]) -
                       (g12re[i] * b12re[i] + g12im[i] * b12im[i]);
    double disc = mix * mix - detg * detb;
    disc = disc > 0.0 ? disc : 0.0;  // Hermitian-definite pencil: real roots
    const double s = std::sqrt(disc);
    lo[i] = (mix - s) / detg;
    hi[i] = (mix + s) / detg;
  }
}

const Table kScalar{sum_scalar,
                    dot_scalar,
                    sup_abs_scalar,
                    axpby_scalar,
                    radius_terms_scalar,
                    square_form_terms_scalar,
                    det2_herm_scalar,
                    eig2_pencil_scalar,
                    "scalar"};

}  // namespace

const Table& scalar_table() { return kScalar; }

}  // namespace cklab::kernels
