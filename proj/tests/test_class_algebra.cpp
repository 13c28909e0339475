#include <doctest.h>

#include <cmath>

#include "cklab/class_algebra.hpp"
#include "cklab/errors.hpp"
#include "cklab/rng.hpp"

using namespace cklab;

namespace {

Matrix herm2(double a, double d, Complex off) {
  Matrix m(2, 2);
  m << a, off, std::conj(off), d;
  return m;
}

Matrix random_hermitian2(Rng& rng, double scale) {
  return herm2(rng.symmetric(scale), rng.symmetric(scale),
               Complex(rng.symmetric(scale), rng.symmetric(scale)));
}

}  // namespace

TEST_CASE("mixed intersection: identity normalization and zero absorption") {
  const Matrix id = Matrix::Identity(2, 2);
  const Complex v = mixed_intersection({id, id});
  CHECK(v.real() == doctest::Approx(2.0));
  CHECK(mixed_intersection({id, Matrix::Zero(2, 2)}) == Complex(0.0));
}

TEST_CASE("mixed intersection is symmetric and multilinear") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = random_hermitian2(rng, 1.0);
    const Matrix b = random_hermitian2(rng, 1.0);
    const Matrix c = random_hermitian2(rng, 1.0);
    const Complex ab = mixed_intersection({a, b});
    const Complex ba = mixed_intersection({b, a});
    CHECK(std::abs(ab - ba) <= 1e-10 * (1.0 + std::abs(ab)));
    const double t = rng.uniform(0.2, 2.0);
    const Complex lin = mixed_intersection({(a + t * c).eval(), b});
    const Complex split = ab + t * mixed_intersection({c, b});
    CHECK(std::abs(lin - split) <= 1e-10 * (1.0 + std::abs(lin)));
  }
}

TEST_CASE("class constants on the torus: B-free class has angle pi/2") {
  Matrix alpha = 1.7 * Matrix::Identity(1, 1);
  Matrix beta = Matrix::Zero(1, 1);
  const ClassData cd = class_constants(alpha, beta, 0.8);
  CHECK(cd.theta_hat == doctest::Approx(M_PI / 2));
  CHECK(cd.c_gamma == doctest::Approx(-0.8));
}

TEST_CASE("class constants: proportional B-field gives arccot(k)") {
  Matrix alpha = 2.0 * Matrix::Identity(1, 1);
  Matrix beta = 3.0 * alpha;  // k = 3
  Matrix c1 = Matrix::Identity(1, 1);
  c1(0, 0) = 2.0;
  const ClassData cd = class_constants(alpha, beta, 1.0, &c1);
  CHECK(cd.theta_hat == doctest::Approx(std::atan2(1.0, 3.0)));
  CHECK(cd.theta_hat < M_PI / 2);  // hypercritical for k > 0
  CHECK(cd.c_gamma ==
        doctest::Approx(2.0 / 2.0 - std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("the rotated volume ratio is real and positive after the lift") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = random_hermitian2(rng, 1.0);
    a = (a * a.adjoint() + 0.4 * Matrix::Identity(2, 2)).eval();
    const Matrix b = random_hermitian2(rng, 1.5);
    const ClassData cd = class_constants(a, b, 1.0);
    const Complex rotated =
        std::exp(Complex(0, -cd.theta_hat)) * cd.volume_ratio;
    CHECK(rotated.real() > 0.0);
    CHECK(std::abs(rotated.imag()) <= 1e-12 * std::abs(cd.volume_ratio));
    const double t = rng.uniform(0.3, 3.0);
    const ClassData scaled =
        class_constants((t * a).eval(), (t * b).eval(), 1.0);
    CHECK(scaled.theta_hat == doctest::Approx(cd.theta_hat).epsilon(1e-12));
  }
}

TEST_CASE("theta_hat override validation") {
  Matrix alpha = Matrix::Identity(1, 1);
  Matrix beta = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(class_constants(alpha, beta, 1.0, nullptr, 0.7),
                  ConfigError);
  CHECK_THROWS_AS(class_constants(alpha, beta, 1.0, nullptr, -1.0),
                  ConfigError);
  const ClassData cd = class_constants(alpha, beta, 1.0, nullptr, M_PI / 2);
  CHECK(cd.theta_hat == doctest::Approx(M_PI / 2));
}

TEST_CASE("stability check: top term vanishes, n = 1 always passes") {
  Matrix alpha = Matrix::Identity(1, 1);
  Matrix beta = 2.0 * Matrix::Identity(1, 1);
  const ClassData cd1 = class_constants(alpha, beta, 1.0);
  const StabilityCheck c1 = stability_check_top(cd1, alpha);
  CHECK(c1.pass);
  REQUIRE(c1.inequalities.size() == 1);
  CHECK(std::abs(c1.inequalities[0]) <= 1e-12);

  Matrix a2 = Matrix::Identity(2, 2);
  const ClassData cd2 = class_constants(a2, a2, 1.0);
  const StabilityCheck c2 = stability_check_top(cd2, a2);
  REQUIRE(c2.inequalities.size() == 2);
  CHECK(std::abs(c2.inequalities[1]) <= 1e-12);  // p = n by construction

  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(stability_check_top(cd2, bad), NonPositiveChi);
}

TEST_CASE("stability slope term matches a hand expansion") {
  // n = 2, alpha = beta = chi = I: (alpha^C).chi = (1+i) I . I = 2 (1+i).
  Matrix a = Matrix::Identity(2, 2);
  const ClassData cd = class_constants(a, a, 1.0);
  const StabilityCheck c = stability_check_top(cd, a);
  const Complex phase = std::exp(Complex(0, -cd.theta_hat));
  const Complex expected_p1 = phase * 2.0 * Complex(1.0, 1.0);
  CHECK(c.inequalities[0] ==
        doctest::Approx(expected_p1.imag()).epsilon(1e-12));
}
