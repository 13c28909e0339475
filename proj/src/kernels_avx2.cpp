// AVX2 variants of the inner-loop kernels. This translation unit is compiled
// with -mavx2 on x86-64; the entry points are only reached after a runtime
// cpuid check in kernels_dispatch.cpp. Elementwise kernels use the same
// IEEE-exact operation sequence as the scalar reference (mul/add/sub/div/sqrt,
// no FMA), so per-element results are bit-identical; reductions use 4-lane
// accumulators inside the pairwise tree and may differ in the last ulps.

#include <cstddef>

#include "cklab/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace cklab::kernels {
namespace {

constexpr std::size_t kPairwiseBase = 32;

double sum_base(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double r = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum_avx2(const double* x, std::size_t n) {
  if (n <= kPairwiseBase) return sum_base(x, n);
  const std::size_t h = n / 2;
  return sum_avx2(x, h) + sum_avx2(x + h, n - h);
}

double dot_base(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double r = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  if (n <= kPairwiseBase) return dot_base(x, y, n);
  const std::size_t h = n / 2;
  return dot_avx2(x, y, h) + dot_avx2(x + h, y + h, n - h);
}

double sup_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max(std::max(lanes[0], lanes[1]),
                      std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::max(r, std::fabs(x[i]));
  return r;
}

void axpby_avx2(double a, const double* x, double b, double* y,
                std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy)));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void radius_terms_avx2(const double* lam, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_loadu_pd(lam + i);
    _mm256_storeu_pd(out + i,
                     _mm256_sqrt_pd(_mm256_add_pd(one, _mm256_mul_pd(l, l))));
  }
  for (; i < n; ++i) out[i] = std::sqrt(1.0 + lam[i] * lam[i]);
}

void square_form_terms_avx2(const double* lam, const double* ure,
                            const double* uim, const double* vre,
                            const double* vim, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_loadu_pd(lam + i);
    const __m256d re = _mm256_sub_pd(_mm256_mul_pd(l, _mm256_loadu_pd(vre + i)),
                                     _mm256_loadu_pd(ure + i));
    const __m256d im = _mm256_sub_pd(_mm256_mul_pd(l, _mm256_loadu_pd(vim + i)),
                                     _mm256_loadu_pd(uim + i));
    const __m256d num =
        _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
    _mm256_storeu_pd(
        out + i, _mm256_div_pd(num, _mm256_add_pd(one, _mm256_mul_pd(l, l))));
  }
  for (; i < n; ++i) {
    const double re = lam[i] * vre[i] - ure[i];
    const double im = lam[i] * vim[i] - uim[i];
    out[i] = (re * re + im * im) / (1.0 + lam[i] * lam[i]);
  }
}

void det2_herm_avx2(const double* h11, const double* h22, const double* h12re,
                    const double* h12im, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(h11 + i);
    const __m256d d = _mm256_loadu_pd(h22 + i);
    const __m256d re = _mm256_loadu_pd(h12re + i);
    const __m256d im = _mm256_loadu_pd(h12im + i);
    const __m256d off =
        _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_mul_pd(a, d), off));
  }
  for (; i < n; ++i) {
    out[i] = h11[i] * h22[i] - (h12re[i] * h12re[i] + h12im[i] * h12im[i]);
  }
}

void eig2_pencil_avx2(const double* g11, const double* g22, const double* g12re,
                      const double* g12im, const double* b11, const double* b22,
                      const double* b12re, const double* b12im, double* lo,
                      double* hi, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ga = _mm256_loadu_pd(g11 + i);
    const __m256d gd = _mm256_loadu_pd(g22 + i);
    const __m256d gre = _mm256_loadu_pd(g12re + i);
    const __m256d gim = _mm256_loadu_pd(g12im + i);
    const __m256d ba = _mm256_loadu_pd(b11 + i);
    const __m256d bd = _mm256_loadu_pd(b22 + i);
    const __m256d bre = _mm256_loadu_pd(b12re + i);
    const __m256d bim = _mm256_loadu_pd(b12im + i);

    const __m256d detg = _mm256_sub_pd(
        _mm256_mul_pd(ga, gd),
        _mm256_add_pd(_mm256_mul_pd(gre, gre), _mm256_mul_pd(gim, gim)));
    const __m256d detb = _mm256_sub_pd(
        _mm256_mul_pd(ba, bd),
        _mm256_add_pd(_mm256_mul_pd(bre, bre), _mm256_mul_pd(bim, bim)));
    const __m256d mix = _mm256_sub_pd(
        _mm256_mul_pd(half, _mm256_add_pd(_mm256_mul_pd(ga, bd),
                                          _mm256_mul_pd(gd, ba))),
        _mm256_add_pd(_mm256_mul_pd(gre, bre), _mm256_mul_pd(gim, bim)));
    __m256d disc =
        _mm256_sub_pd(_mm256_mul_pd(mix, mix), _mm256_mul_pd(detg, detb));
    disc = _mm256_max_pd(disc, zero);
    const __m256d s = _mm256_sqrt_pd(disc);
    _mm256_storeu_pd(lo + i, _mm256_div_pd(_mm256_sub_pd(mix, s), detg));
    _mm256_storeu_pd(hi + i, _mm256_div_pd(_mm256_add_pd(mix, s), detg));
  }
  if (i < n) {
    scalar_table().eig2_pencil(g11 + i, g22 + i, g12re + i, g12im + i, b11 + i,
                               b22 + i, b12re + i, b12im + i, lo + i, hi + i,
                               n - i);
  }
}

const Table kAvx2{sum_avx2,
                  dot_avx2,
                  sup_abs_avx2,
                  axpby_avx2,
                  radius_terms_avx2,
                  square_form_terms_avx2,
                  det2_herm_avx2,
                  eig2_pencil_avx2,
                  "avx2"};

}  // namespace

const Table* avx2_table_impl() { return &kAvx2; }

}  // namespace cklab::kernels

#else  // !__AVX2__

namespace cklab::kernels {
const Table* avx2_table_impl() { return nullptr; }
}  // namespace cklab::kernels

#endif
