#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cklab/errors.hpp"
#include "cklab/pointwise.hpp"
#include "cklab/rng.hpp"

using namespace cklab;

namespace {

Matrix random_hermitian(int n, Rng& rng, double scale) {
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = rng.symmetric(scale);
    for (int j = i + 1; j < n; ++j) {
      a(i, j) = Complex(rng.symmetric(scale), rng.symmetric(scale));
      a(j, i) = std::conj(a(i, j));
    }
  }
  return a;
}

Matrix random_metric(int n, Rng& rng) {
  Matrix a = random_hermitian(n, rng, 1.0);
  return (a * a.adjoint() + 0.3 * Matrix::Identity(n, n)).eval();
}

// Independent oracle: coefficients of p(lambda) = det(B - lambda G) by
// interpolation through determinant evaluations, then closed-form real roots.
std::vector<double> charpoly_roots(const Matrix& g, const Matrix& b) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXd vander(n + 1, n + 1);
  Eigen::VectorXd vals(n + 1);
  for (int s = 0; s <= n; ++s) {
    const double t = -1.5 + s;  // distinct sample abscissae
    Matrix m = b - t * g;
    vals(s) = m.determinant().real();
    for (int j = 0; j <= n; ++j) vander(s, j) = std::pow(t, j);
  }
  Eigen::VectorXd coeff = vander.fullPivLu().solve(vals);
  std::vector<double> roots;
  if (n == 1) {
    roots.push_back(-coeff(0) / coeff(1));
  } else if (n == 2) {
    const double a = coeff(2), bb = coeff(1), c = coeff(0);
    const double disc = std::sqrt(std::max(bb * bb - 4 * a * c, 0.0));
    roots.push_back((-bb - disc) / (2 * a));
    roots.push_back((-bb + disc) / (2 * a));
  } else {
    // Depressed-cubic trigonometric formula.
    const double a = coeff(3);
    const double p1 = coeff(2) / a, p2 = coeff(1) / a, p3 = coeff(0) / a;
    const double q = p1 / 3.0;
    const double pp = p2 - p1 * p1 / 3.0;
    const double qq = 2.0 * p1 * p1 * p1 / 27.0 - p1 * p2 / 3.0 + p3;
    const double m = 2.0 * std::sqrt(-pp / 3.0);
    const double arg =
        std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0) - q);
    }
  }
  std::sort(roots.begin(), roots.end());
  if (static_cast<int>(roots.size()) > n) roots.resize(n);
  return roots;
}

}  // namespace

TEST_CASE("arccot has range (0, pi) and the reflection identity") {
  Rng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double x = std::tan(rng.uniform(-1.55, 1.55)) * 3.0;
    const double a = arccot(x);
    CHECK(a > 0.0);
    CHECK(a < M_PI);
    CHECK(arccot(-x) == doctest::Approx(M_PI - a).epsilon(1e-13));
  }
}

TEST_CASE("relative eigenvalues: diagonal and scalar cases") {
  Matrix omega = Matrix::Identity(2, 2);
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = 2.0;
  const Spectrum s = relative_eigenvalues(HermitianPair(omega, b));
  REQUIRE(s.lambdas.size() == 2);
  CHECK(s.lambdas[0] == doctest::Approx(1.0));
  CHECK(s.lambdas[1] == doctest::Approx(2.0));

  Matrix omega1 = 2.0 * Matrix::Identity(1, 1);
  Matrix b1 = Matrix::Identity(1, 1);
  const Spectrum s1 = relative_eigenvalues(HermitianPair(omega1, b1));
  CHECK(s1.lambdas[0] == doctest::Approx(0.5));
}

TEST_CASE("relative eigenvalues match the characteristic-polynomial oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = random_metric(3, rng);
    const Matrix b = random_hermitian(3, rng, 1.5);
    const Spectrum s = relative_eigenvalues(HermitianPair(g, b));
    const auto roots = charpoly_roots(g, b);
    REQUIRE(roots.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(s.lambdas[i] == doctest::Approx(roots[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("relative eigenvalues are congruence-invariant") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix g = random_metric(2, rng);
    const Matrix b = random_hermitian(2, rng, 1.0);
    Matrix s = random_hermitian(2, rng, 0.7) +
               Complex(0, 1) * random_hermitian(2, rng, 0.7);
    s += 2.0 * Matrix::Identity(2, 2);
    const Matrix g2 = (s.adjoint() * g * s).eval();
    const Matrix b2 = (s.adjoint() * b * s).eval();
    const Spectrum s0 =
        relative_eigenvalues(HermitianPair(g, b));
    const Spectrum s1 = relative_eigenvalues(
        HermitianPair(0.5 * (g2 + g2.adjoint()), 0.5 * (b2 + b2.adjoint())));
    for (int i = 0; i < 2; ++i) {
      CHECK(s0.lambdas[i] == doctest::Approx(s1.lambdas[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("non-positive omega is rejected") {
  Matrix omega = Matrix::Identity(2, 2);
  omega(1, 1) = -1.0;
  CHECK_THROWS_AS(relative_eigenvalues(HermitianPair(omega, omega)),
                  NonPositiveMetric);
}

TEST_CASE("lagrangian phase and radius closed cases") {
  CHECK(lagrangian_phase({{0.0}}) == doctest::Approx(M_PI / 2));
  CHECK(lagrangian_phase({{1.0, 1.0}}) == doctest::Approx(M_PI / 2));
  CHECK(lagrangian_phase({{-1.0, -1.0}}) == doctest::Approx(3 * M_PI / 2));
  CHECK(lagrangian_radius({{0.0, 0.0}}) == doctest::Approx(1.0));
  CHECK(lagrangian_radius({{1.0, 1.0}}) == doctest::Approx(2.0));
}

TEST_CASE("radius matches the determinant oracle |det(Lam + iI)|") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Spectrum s;
    Complex det = 1.0;
    for (int i = 0; i < 3; ++i) {
      s.lambdas.push_back(rng.symmetric(4.0));
      det *= Complex(s.lambdas.back(), 1.0);
    }
    CHECK(lagrangian_radius(s) ==
          doctest::Approx(std::abs(det)).epsilon(1e-12));
  }
}

TEST_CASE("complexified volume ratio closed cases") {
  const Complex r1 =
      complexified_volume_ratio(HermitianPair(Matrix::Identity(2, 2),
                                              Matrix::Zero(2, 2)));
  CHECK(r1.real() == doctest::Approx(-1.0));
  CHECK(r1.imag() == doctest::Approx(0.0));

  Matrix b1 = 3.5 * Matrix::Identity(1, 1);
  const Complex r2 =
      complexified_volume_ratio(HermitianPair(Matrix::Identity(1, 1), b1));
  CHECK(r2.real() == doctest::Approx(3.5));
  CHECK(r2.imag() == doctest::Approx(1.0));
}

TEST_CASE("phase/radius composition equals the volume ratio mod 2 pi") {
  Rng rng(13);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const Matrix g = random_metric(n, rng);
      const Matrix b = random_hermitian(n, rng, 2.0);
      const HermitianPair pair(g, b);
      const PhaseRadius pr = phase_radius(pair);
      const Complex lhs = pr.radius * std::exp(Complex(0.0, pr.theta));
      const Complex rhs = complexified_volume_ratio(pair);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * pr.radius);
      CHECK(pr.theta > 0.0);
      CHECK(pr.theta < n * M_PI);
      CHECK(pr.radius >= 1.0);
    }
  }
}

TEST_CASE("almost calibrated predicate") {
  Matrix omega = Matrix::Identity(1, 1);
  Matrix b = Matrix::Zero(1, 1);
  const HermitianPair pair(omega, b);  // Theta = pi/2
  CHECK(is_almost_calibrated(pair, M_PI / 2));
  CHECK(!is_almost_calibrated(pair, 3 * M_PI / 2));

  Matrix omega2 = Matrix::Identity(2, 2);
  const HermitianPair pair2(omega2, omega2);  // Theta = pi/2
  CHECK(is_almost_calibrated(pair2, M_PI / 4));
}

TEST_CASE("convexity summands: worked example and the vanishing square") {
  const auto s = convexity_summands(2.0, 0.0, Complex(1.0, 0.0),
                                    Complex(1.0, 0.0));
  CHECK(s.critical == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(s.square_form == doctest::Approx(0.2).epsilon(1e-14));

  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const double lam = rng.symmetric(3.0) + 3.5;  // nonzero
    const double eta = rng.symmetric(1.2);
    const Complex v(rng.symmetric(2.0), rng.symmetric(2.0));
    const Complex u = lam * v;
    const auto r = convexity_summands(lam, eta, u, v);
    CHECK(std::abs(r.critical) <= 1e-12);
    CHECK(std::abs(r.geodesic * std::cos(eta)) <= 1e-12);
    CHECK(std::abs(r.square_form) <= 1e-14);
  }

  const auto w = convexity_summands(1.0, M_PI / 4, 0.0, 0.0);
  CHECK(w.kgeod_weight == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  CHECK_THROWS_AS(convexity_summands(0.0, 0.1, 1.0, 1.0), DivisionByZero);
}

TEST_CASE("perfect-square identities over random samples") {
  Rng rng(23);
  double worst_critical = 0.0, worst_geodesic = 0.0;
  for (int trial = 0; trial < 100000; ++trial) {
    const double lam = rng.symmetric(5.0);
    if (lam == 0.0) continue;
    const double eta = rng.uniform(-1.4, 1.4);  // cos eta > 0
    const Complex u(rng.symmetric(2.0), rng.symmetric(2.0));
    const Complex v(rng.symmetric(2.0), rng.symmetric(2.0));
    const auto s = convexity_summands(lam, eta, u, v);
    worst_critical = std::max(worst_critical,
                              std::fabs(s.critical - s.square_form));
    worst_geodesic = std::max(
        worst_geodesic, std::fabs(s.geodesic * std::cos(eta) - s.square_form));
  }
  CHECK(worst_critical <= 1e-12);
  CHECK(worst_geodesic <= 1e-12);
}
