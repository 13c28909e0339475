#include <doctest.h>

#include <cmath>

#include "cklab/errors.hpp"
#include "cklab/functionals.hpp"
#include "cklab/rng.hpp"

using namespace cklab;

namespace {

ScalarField random_wave(const TorusGrid& g, Rng& rng, int max_mode = 1) {
  ScalarField f(g);
  const int axes = g.axes();
  for (int trial = 0; trial < 3; ++trial) {
    double k[4] = {0, 0, 0, 0};
    bool nonzero = false;
    for (int a = 0; a < axes; ++a) {
      k[a] = std::floor(rng.uniform(0.0, max_mode + 1.0));
      nonzero = nonzero || k[a] != 0.0;
    }
    if (!nonzero) k[0] = 1.0;
    const double phase = rng.uniform(0.0, 2 * M_PI);
    const double c = rng.symmetric(1.0);
    for (std::size_t p = 0; p < f.size(); ++p) {
      double arg = phase;
      for (int a = 0; a < axes; ++a) arg += 2 * M_PI * k[a] * g.coord(p, a);
      f[p] += c * std::cos(arg);
    }
  }
  make_mean_zero(f);
  return f;
}

// Potential scaled so the displaced metric keeps a comfortable margin.
ScalarField scaled_potential(const TorusGrid& g, Rng& rng, double target) {
  ScalarField f = random_wave(g, rng);
  const FormField h = ddbar(f);
  double sup = 0.0;
  for (const auto& c : h.comp) {
    for (double x : c) sup = std::max(sup, std::fabs(x));
  }
  for (auto& x : f.v) x *= target / sup;
  return f;
}

ClassData torus_class_n1(double k, double gamma_abs) {
  Matrix alpha = Matrix::Identity(1, 1);
  Matrix beta = k * Matrix::Identity(1, 1);
  return class_constants(alpha, beta, gamma_abs);
}

ClassData torus_class_n2(double gamma_abs) {
  Matrix alpha = Matrix::Identity(2, 2);
  Matrix beta(2, 2);
  beta << 1.0, Complex(0.25, 0.1), Complex(0.25, -0.1), 0.5;
  return class_constants(alpha, beta, gamma_abs);
}

ComplexPotential small_potential(const TorusGrid& g, Rng& rng, double amp) {
  return make_potential(scaled_potential(g, rng, amp),
                        scaled_potential(g, rng, amp));
}

}  // namespace

TEST_CASE("entropy: zero at reference, Jensen bound, quadratic scaling") {
  const TorusGrid g(1, 32);
  Rng rng(1);
  const ClassData cd = torus_class_n1(1.0, 1.0);
  CHECK(std::abs(entropy(ScalarField(g), cd.alpha_rep)) <= 1e-14);
  const ScalarField v = scaled_potential(g, rng, 0.3);
  CHECK(entropy(v, cd.alpha_rep) >= -1e-10);

  // H(eps v)/eps^2 stabilizes.
  double r1 = entropy(ScalarField(g), cd.alpha_rep);
  (void)r1;
  ScalarField v1 = v, v2 = v;
  for (auto& x : v1.v) x *= 1e-3;
  for (auto& x : v2.v) x *= 5e-4;
  const double q1 = entropy(v1, cd.alpha_rep) / (1e-3 * 1e-3);
  const double q2 = entropy(v2, cd.alpha_rep) / (5e-4 * 5e-4);
  CHECK(q1 == doctest::Approx(q2).epsilon(1e-2));
}

TEST_CASE("energy family: reference value, gauge shift, first variation") {
  for (int n : {1, 2}) {
    const TorusGrid g(n, n == 1 ? 32 : 8);
    Rng rng(2 + n);
    const ClassData cd = n == 1 ? torus_class_n1(0.5, 1.0)
                                : torus_class_n2(1.0);
    CHECK(std::abs(energy_family(ScalarField(g), cd.alpha_rep)) <= 1e-14);

    // Constant shift before gauging: E(v + c) = E(v) + (n+1) c alpha^n.
    const ScalarField v = scaled_potential(g, rng, 0.2);
    ScalarField vshift = v;
    for (auto& x : vshift.v) x += 0.3;
    const double alpha_vol =
        mixed_intersection(std::vector<Matrix>(n, cd.alpha_rep)).real();
    CHECK(energy_family(vshift, cd.alpha_rep) -
              energy_family(v, cd.alpha_rep) ==
          doctest::Approx((n + 1) * 0.3 * alpha_vol).epsilon(1e-10));

    // d/dt E(t v) at 0 equals (n+1) int v omega0^n.
    const double t = 1e-5;
    ScalarField vp = v, vm = v;
    for (auto& x : vp.v) x *= t;
    for (auto& x : vm.v) x *= -t;
    const double fd = (energy_family(vp, cd.alpha_rep) -
                       energy_family(vm, cd.alpha_rep)) /
                      (2 * t);
    ScalarField zero(g);
    const FormField flat = assemble_form(cd.alpha_rep, &zero, true);
    const double expected = (n + 1) * integrate(v, flat);
    CHECK(fd == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("complexified energy reduces to the i-weighted energy at B = 0") {
  const TorusGrid g(1, 32);
  Rng rng(7);
  Matrix alpha = Matrix::Identity(1, 1);
  Matrix beta = Matrix::Zero(1, 1);
  const ClassData cd = class_constants(alpha, beta, 1.0);
  const ScalarField v = scaled_potential(g, rng, 0.2);
  const ComplexPotential phi = make_potential(ScalarField(g), v);
  const Complex ec = complexified_energy(phi, cd);
  // n = 1: E^C(i v) = i^2 E(v) = -E(v).
  const double e = energy_family(v, cd.alpha_rep);
  CHECK(ec.real() == doctest::Approx(-e).epsilon(1e-12));
  CHECK(std::abs(ec.imag()) <= 1e-12 * (1.0 + std::abs(e)));

  // d/dt E^C(t phi) at 0 = (n+1) int phi (omega0^C)^n.
  Rng rng2(8);
  const ComplexPotential psi = small_potential(g, rng2, 0.2);
  const double t = 1e-5;
  ComplexPotential pp{psi.u, psi.v}, pm{psi.u, psi.v};
  for (std::size_t p = 0; p < psi.u.size(); ++p) {
    pp.u[p] *= t;
    pp.v[p] *= t;
    pm.u[p] *= -t;
    pm.v[p] *= -t;
  }
  const Complex fd =
      (complexified_energy(pp, cd) - complexified_energy(pm, cd)) / (2 * t);
  // (omega0^C)^n density: det(B0 + iA0) = i for these classes.
  std::vector<double> dre(g.points()), dim(g.points());
  for (std::size_t p = 0; p < g.points(); ++p) {
    const Complex val = Complex(psi.u[p], psi.v[p]) * Complex(0.0, 1.0);
    dre[p] = val.real();
    dim[p] = val.imag();
  }
  const Complex expected(2.0 * top_integral(g, dre),
                         2.0 * top_integral(g, dim));
  CHECK(std::abs(fd - expected) <= 1e-7 * (1.0 + std::abs(expected)));
}

TEST_CASE("K-energy equals the line integral of its first variation") {
  for (int n : {1, 2}) {
    const TorusGrid g(n, n == 1 ? 32 : 8);
    Rng rng(11 + n);
    const ClassData cd = n == 1 ? torus_class_n1(1.0, 0.8)
                                : torus_class_n2(0.8);
    const ComplexPotential phi = small_potential(g, rng, 0.25);

    // 33-point composite Simpson along t -> t phi.
    const int segments = 32;
    double line = 0.0;
    for (int k = 0; k <= segments; ++k) {
      const double t = static_cast<double>(k) / segments;
      ComplexPotential at{phi.u, phi.v};
      for (std::size_t p = 0; p < phi.u.size(); ++p) {
        at.u[p] *= t;
        at.v[p] *= t;
      }
      const double w =
          (k == 0 || k == segments) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      line += w * first_variation(at, phi, cd);
    }
    line *= 1.0 / (3.0 * segments);

    const double direct = complexified_k_energy(phi, cd);
    CHECK(direct == doctest::Approx(line).epsilon(1e-5));
  }
}

TEST_CASE("first variation matches Richardson finite differences of the K-energy") {
  for (int n : {1, 2}) {
    const TorusGrid g(n, n == 1 ? 32 : 8);
    Rng rng(17 + n);
    const ClassData cd = n == 1 ? torus_class_n1(0.7, 1.2)
                                : torus_class_n2(1.2);
    const ComplexPotential phi = small_potential(g, rng, 0.2);
    for (int dir_trial = 0; dir_trial < 3; ++dir_trial) {
      const ComplexPotential dir = small_potential(g, rng, 0.1);
      const double sigma = first_variation(phi, dir, cd);
      auto energy_at = [&](double t) {
        ComplexPotential at{phi.u, phi.v};
        for (std::size_t p = 0; p < phi.u.size(); ++p) {
          at.u[p] += t * dir.u[p];
          at.v[p] += t * dir.v[p];
        }
        return complexified_k_energy(at, cd);
      };
      const double h1 = 1e-3;
      const double d1 = (energy_at(h1) - energy_at(-h1)) / (2 * h1);
      const double d2 = (energy_at(h1 / 2) - energy_at(-h1 / 2)) / h1;
      const double richardson = (4.0 * d2 - d1) / 3.0;
      CHECK(std::abs(sigma - richardson) <=
            1e-5 * (1.0 + std::abs(sigma)));
    }
  }
}

TEST_CASE("sigma vanishes for constant directions and at the flat solution") {
  const TorusGrid g(1, 32);
  Rng rng(23);
  const ClassData cd = torus_class_n1(2.0, 1.0);
  const ComplexPotential phi = small_potential(g, rng, 0.2);
  // Constant directions cost nothing by the definitions of c_gamma and
  // arg(gamma); constants here mean the pre-gauge constants.
  ComplexPotential cdir{ScalarField(g, 1.0), ScalarField(g)};
  CHECK(std::abs(first_variation(phi, cdir, cd)) <= 1e-10);
  ComplexPotential cdir2{ScalarField(g), ScalarField(g, 1.0)};
  CHECK(std::abs(first_variation(phi, cdir2, cd)) <= 1e-10);

  // At the exact flat solution sigma vanishes identically.
  const ComplexPotential origin{ScalarField(g), ScalarField(g)};
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexPotential dir = small_potential(g, rng, 0.3);
    CHECK(std::abs(first_variation(origin, dir, cd)) <= 1e-12);
  }
}

TEST_CASE("closedness: the mixed second differences of sigma are symmetric") {
  const TorusGrid g(1, 32);
  Rng rng(29);
  const ClassData cd = torus_class_n1(1.0, 1.0);
  const ComplexPotential phi = small_potential(g, rng, 0.15);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexPotential psi1 = small_potential(g, rng, 0.1);
    const ComplexPotential psi2 = small_potential(g, rng, 0.1);
    auto shift = [&](const ComplexPotential& base, const ComplexPotential& d,
                     double t) {
      ComplexPotential out{base.u, base.v};
      for (std::size_t p = 0; p < base.u.size(); ++p) {
        out.u[p] += t * d.u[p];
        out.v[p] += t * d.v[p];
      }
      return out;
    };
    // Richardson-extrapolated central differences in each direction.
    auto dsigma = [&](const ComplexPotential& mover,
                      const ComplexPotential& probe) {
      const double t = 0.1;
      const double d1 = (first_variation(shift(phi, mover, t), probe, cd) -
                         first_variation(shift(phi, mover, -t), probe, cd)) /
                        (2 * t);
      const double d2 =
          (first_variation(shift(phi, mover, t / 2), probe, cd) -
           first_variation(shift(phi, mover, -t / 2), probe, cd)) /
          t;
      return (4.0 * d2 - d1) / 3.0;
    };
    const double a = dsigma(psi2, psi1);
    const double b = dsigma(psi1, psi2);
    CHECK(std::abs(a - b) <= 1e-8 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("Calabi functional: lower bound, equality at the solution") {
  const TorusGrid g(1, 32);
  Rng rng(31);
  const ClassData cd = torus_class_n1(1.5, 1.0);
  const ComplexPotential origin{ScalarField(g), ScalarField(g)};
  const CalabiValue at_solution = complexified_calabi(origin, cd);
  CHECK(std::abs(at_solution.value - at_solution.floor) <= 1e-10);

  for (int trial = 0; trial < 10; ++trial) {
    const ComplexPotential phi = small_potential(g, rng, 0.2);
    const CalabiValue cv = complexified_calabi(phi, cd);
    CHECK(cv.value - cv.floor >= -1e-10);
    CHECK(cv.value >
          at_solution.value + 1e-8);  // strict away from the solution
    CHECK(cv.value ==
          doctest::Approx(cv.deviation + cv.floor).epsilon(1e-10));
  }
}

TEST_CASE("volume functional: flat value, class value at solutions, minimality") {
  const TorusGrid g(2, 8);
  Rng rng(37);
  Matrix alpha = Matrix::Identity(2, 2);
  const ClassData cd0 = class_constants(alpha, Matrix::Zero(2, 2), 1.0);
  ScalarField zero(g);
  const FormField flat = assemble_form(alpha, &zero, true);
  CHECK(volume_functional(ScalarField(g), flat, cd0) ==
        doctest::Approx(2.0).epsilon(1e-12));

  const ClassData cd = torus_class_n2(1.0);
  const double v_solution = volume_functional(ScalarField(g), flat, cd);
  const double class_value = std::abs(mixed_intersection(
      {(cd.beta_rep + Complex(0, 1) * cd.alpha_rep).eval(),
       (cd.beta_rep + Complex(0, 1) * cd.alpha_rep).eval()}));
  CHECK(v_solution == doctest::Approx(class_value).epsilon(1e-10));

  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField u = scaled_potential(g, rng, 0.2);
    CHECK(volume_functional(u, flat, cd) >= v_solution - 1e-12);
  }
}

TEST_CASE("K-energy is path independent between the same endpoints") {
  const TorusGrid g(1, 32);
  Rng rng(41);
  const ClassData cd = torus_class_n1(1.0, 1.0);
  const ComplexPotential target = small_potential(g, rng, 0.2);
  const ComplexPotential mid = small_potential(g, rng, 0.1);

  auto segment_integral = [&](const ComplexPotential& a,
                              const ComplexPotential& b) {
    const int segments = 32;
    ComplexPotential diff{b.u, b.v};
    for (std::size_t p = 0; p < a.u.size(); ++p) {
      diff.u[p] -= a.u[p];
      diff.v[p] -= a.v[p];
    }
    double acc = 0.0;
    for (int k = 0; k <= segments; ++k) {
      const double t = static_cast<double>(k) / segments;
      ComplexPotential at{a.u, a.v};
      for (std::size_t p = 0; p < a.u.size(); ++p) {
        at.u[p] += t * diff.u[p];
        at.v[p] += t * diff.v[p];
      }
      const double w =
          (k == 0 || k == segments) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      acc += w * first_variation(at, diff, cd);
    }
    return acc / (3.0 * segments);
  };

  const ComplexPotential origin{ScalarField(g), ScalarField(g)};
  const double direct = segment_integral(origin, target);
  const double detour =
      segment_integral(origin, mid) + segment_integral(mid, target);
  CHECK(direct == doctest::Approx(detour).epsilon(1e-5));
  CHECK(complexified_k_energy(target, cd) ==
        doctest::Approx(direct).epsilon(1e-5));
}

TEST_CASE("calibration margin flags potentials leaving the band") {
  const TorusGrid g(1, 32);
  const ClassData cd = torus_class_n1(1.0, 1.0);
  const ComplexPotential origin{ScalarField(g), ScalarField(g)};
  CHECK(calibration_margin(origin, cd) > 0.9);  // exactly on the phase

  // A large B-displacement rotates the phase out of the band.
  const ScalarField wave = sample_field(
      g, [](const double* x) { return 40.0 * std::cos(2 * M_PI * x[0]); });
  const ComplexPotential far = make_potential(wave, ScalarField(g));
  CHECK(calibration_margin(far, cd) < 0.0);
}
