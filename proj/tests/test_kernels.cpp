#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "cklab/kernels.hpp"
#include "cklab/rng.hpp"

using namespace cklab;

namespace {

struct Arrays {
  std::vector<double> a, b, c, d, e, f;
};

Arrays random_arrays(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Arrays out;
  auto fill = [&](std::vector<double>& v) {
    v.resize(n);
    for (auto& x : v) x = rng.uniform(-3.0, 3.0);
  };
  fill(out.a);
  fill(out.b);
  fill(out.c);
  fill(out.d);
  fill(out.e);
  fill(out.f);
  return out;
}

}  // namespace

TEST_CASE("kernel dispatch selects a valid backend") {
  const auto& t = kernels::active();
  CHECK((std::string(t.name) == "scalar" || std::string(t.name) == "avx2"));
}

TEST_CASE("pairwise sum keeps small addends on adversarial data") {
  // A naive left-to-right sum absorbs every small addend into the leading 1.0
  // and returns exactly 1.0; the pairwise tree only loses the few addends
  // sharing the base block with it.
  std::vector<double> v(100001, 1e-16);
  v[0] = 1.0;
  double naive = 0.0;
  for (double x : v) naive += x;
  CHECK(naive == 1.0);
  const double s = kernels::scalar_table().sum(v.data(), v.size());
  CHECK(s > 1.0 + 0.99e-11);
  CHECK(s < 1.0 + 1.01e-11);
}

TEST_CASE("scalar and AVX2 elementwise kernels are bit-identical") {
  const auto* avx2 = kernels::avx2_table();
  if (!avx2) return;  // machine without AVX2: nothing to compare
  const auto& sc = kernels::scalar_table();
  for (std::size_t n : {1, 4, 7, 64, 1001}) {
    const Arrays in = random_arrays(n, 42 + n);

    std::vector<double> r1(n), r2(n);
    sc.radius_terms(in.a.data(), r1.data(), n);
    avx2->radius_terms(in.a.data(), r2.data(), n);
    CHECK(r1 == r2);

    sc.square_form_terms(in.a.data(), in.b.data(), in.c.data(), in.d.data(),
                         in.e.data(), r1.data(), n);
    avx2->square_form_terms(in.a.data(), in.b.data(), in.c.data(), in.d.data(),
                            in.e.data(), r2.data(), n);
    CHECK(r1 == r2);

    sc.det2_herm(in.a.data(), in.b.data(), in.c.data(), in.d.data(), r1.data(),
                 n);
    avx2->det2_herm(in.a.data(), in.b.data(), in.c.data(), in.d.data(),
                    r2.data(), n);
    CHECK(r1 == r2);

    std::vector<double> y1 = in.f, y2 = in.f;
    sc.axpby(0.7, in.a.data(), -1.3, y1.data(), n);
    avx2->axpby(0.7, in.a.data(), -1.3, y2.data(), n);
    CHECK(y1 == y2);

    CHECK(sc.sup_abs(in.a.data(), n) == avx2->sup_abs(in.a.data(), n));
  }
}

TEST_CASE("scalar and AVX2 eig2_pencil agree bitwise on definite pencils") {
  const auto* avx2 = kernels::avx2_table();
  if (!avx2) return;
  const std::size_t n = 513;
  Rng rng(7);
  std::vector<double> g11(n), g22(n), g12re(n), g12im(n);
  std::vector<double> b11(n), b22(n), b12re(n), b12im(n);
  for (std::size_t i = 0; i < n; ++i) {
    g12re[i] = rng.symmetric(0.4);
    g12im[i] = rng.symmetric(0.4);
    g11[i] = 1.0 + rng.uniform(0.0, 2.0);
    g22[i] = 1.0 + rng.uniform(0.0, 2.0);
    b12re[i] = rng.symmetric(1.0);
    b12im[i] = rng.symmetric(1.0);
    b11[i] = rng.symmetric(2.0);
    b22[i] = rng.symmetric(2.0);
  }
  std::vector<double> lo1(n), hi1(n), lo2(n), hi2(n);
  kernels::scalar_table().eig2_pencil(g11.data(), g22.data(), g12re.data(),
                                      g12im.data(), b11.data(), b22.data(),
                                      b12re.data(), b12im.data(), lo1.data(),
                                      hi1.data(), n);
  avx2->eig2_pencil(g11.data(), g22.data(), g12re.data(), g12im.data(),
                    b11.data(), b22.data(), b12re.data(), b12im.data(),
                    lo2.data(), hi2.data(), n);
  CHECK(lo1 == lo2);
  CHECK(hi1 == hi2);
}

TEST_CASE("scalar and AVX2 reductions agree to rounding") {
  const auto* avx2 = kernels::avx2_table();
  if (!avx2) return;
  const Arrays in = random_arrays(4099, 11);
  const double s1 = kernels::scalar_table().sum(in.a.data(), in.a.size());
  const double s2 = avx2->sum(in.a.data(), in.a.size());
  CHECK(s1 == doctest::Approx(s2).epsilon(1e-13));
  const double d1 =
      kernels::scalar_table().dot(in.a.data(), in.b.data(), in.a.size());
  const double d2 = avx2->dot(in.a.data(), in.b.data(), in.a.size());
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-13));
}

TEST_CASE("eig2_pencil matches the generalized eigensolver") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::complex<double> g12(rng.symmetric(0.5), rng.symmetric(0.5));
    const std::complex<double> b12(rng.symmetric(1.5), rng.symmetric(1.5));
    Eigen::Matrix2cd g, b;
    g << rng.uniform(0.5, 3.0), g12, std::conj(g12), rng.uniform(0.5, 3.0);
    b << rng.symmetric(2.0), b12, std::conj(b12), rng.symmetric(2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> gchk(g);
    if (gchk.eigenvalues()(0) <= 0.1) continue;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> es(b, g);
    double lo, hi;
    const double g11 = g(0, 0).real(), g22 = g(1, 1).real();
    const double b11 = b(0, 0).real(), b22 = b(1, 1).real();
    const double g12re = g12.real(), g12im = g12.imag();
    const double b12re = b12.real(), b12im = b12.imag();
    kernels::scalar_table().eig2_pencil(&g11, &g22, &g12re, &g12im, &b11, &b22,
                                        &b12re, &b12im, &lo, &hi, 1);
    CHECK(lo == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
    CHECK(hi == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-10));
  }
}
