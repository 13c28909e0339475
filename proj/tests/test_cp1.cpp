#include <doctest.h>

#include <cmath>

#include "cklab/cp1.hpp"
#include "cklab/errors.hpp"
#include "cklab/pointwise.hpp"
#include "cklab/rng.hpp"

using namespace cklab;
using namespace cklab::cp1;

namespace {

// Smooth class-preserving bump, rescaled so sup |ddbar| hits the target.
Samples bump_potential(const Grid& g, Rng& rng, double target) {
  Samples f(g.M);
  const double a = rng.symmetric(1.0);
  const double b = rng.uniform(0.5, 2.5);
  const double c = rng.uniform(0.0, 3.0);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    const double bump = (1.0 - x * x) * (1.0 - x * x);
    f[i] = a * bump * std::sin(b * x + c);
  }
  const Samples dd = ddbar_density(g, f);
  double sup = 0.0;
  for (double v : dd) sup = std::max(sup, std::fabs(v));
  for (double& v : f) v *= target / sup;
  return f;
}

}  // namespace

TEST_CASE("derivatives and quadrature are high order on the open grid") {
  const Grid g(256);
  Samples f(g.M), fp(g.M), fpp(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    f[i] = std::exp(x);
    fp[i] = std::exp(x);
    fpp[i] = std::exp(x);
  }
  const Samples d1 = deriv(g, f);
  const Samples d2 = deriv2(g, f);
  double w1 = 0.0, w2 = 0.0;
  for (int i = 0; i < g.M; ++i) {
    w1 = std::max(w1, std::fabs(d1[i] - fp[i]));
    w2 = std::max(w2, std::fabs(d2[i] - fpp[i]));
  }
  CHECK(w1 <= 1e-7);
  CHECK(w2 <= 1e-5);

  // Quadrature exact on cubics; spectral-grade on smooth data.
  Samples cubic(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    cubic[i] = 1.0 + x + x * x + x * x * x;
  }
  CHECK(quad(g, cubic) == doctest::Approx(2.0 + 2.0 / 3.0).epsilon(1e-13));
  CHECK(quad(g, f) ==
        doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-10));

  const Samples ci = cumint(g, f);
  double wc = 0.0;
  for (int i = 0; i < g.M; ++i) {
    wc = std::max(wc, std::fabs(ci[i] - (std::exp(g.x[i]) - std::exp(-1.0))));
  }
  CHECK(wc <= 1e-9);
}

TEST_CASE("invariant ddbar preserves the class and matches the flow form") {
  const Grid g(256);
  Samples f(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    f[i] = 0.3 * (1.0 - x * x) * (1.0 - x * x);
  }
  const Samples dw = ddbar_density(g, f);
  // Endpoint extrapolation on the degree-6 integrand limits this slightly.
  CHECK(std::abs(quad(g, dw)) <= 1e-7);

  // Known pullback: Im of the flow potential reproduces the translated
  // round density exactly.
  const double s = 2.0, c = 0.35;
  Samples psi(g.M), w_exact(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double xi = std::atanh(g.x[i]);
    psi[i] = s * (std::log(std::cosh(xi + c)) - std::log(std::cosh(xi)));
    const double th = std::tanh(xi + c);
    w_exact[i] = 0.5 * s * (1.0 - th * th) / (1.0 - g.x[i] * g.x[i]);
  }
  const Samples dpsi = ddbar_density(g, psi);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    worst = std::max(worst, std::fabs(0.5 * s + dpsi[i] - w_exact[i]));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("round metric curvature is constant and satisfies Gauss-Bonnet") {
  for (double s : {2.0, 3.0}) {
    const Grid g(256);
    Samples w(g.M, 0.5 * s);
    const Samples curv = curvature_density(g, w);
    double worst = 0.0;
    for (int i = 0; i < g.M; ++i) {
      worst = std::max(worst, std::fabs(curv[i] - 2.0 / s));
    }
    CHECK(worst <= 1e-8);
    Samples dens(g.M);
    for (int i = 0; i < g.M; ++i) dens[i] = curv[i] * w[i];
    CHECK(quad(g, dens) == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("Abreu curvature: round value, gauge invariance, stencil oracle") {
  const Grid g(512);
  MomentumProfile p;
  p.grid = g;
  p.class_scale = 2.0;
  p.correction.assign(g.M, 0.0);
  const Samples s0 = abreu_scalar_curvature(p);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    worst = std::max(worst, std::fabs(s0[i] - 1.0));
  }
  CHECK(worst <= 1e-8);

  // Affine corrections change nothing observable.
  MomentumProfile paff = p;
  for (int i = 0; i < g.M; ++i) paff.correction[i] = 0.3 + 0.7 * g.x[i];
  const Samples saff = abreu_scalar_curvature(paff);
  worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    worst = std::max(worst, std::fabs(saff[i] - s0[i]));
  }
  // Exact in exact arithmetic; two stacked second derivatives amplify
  // rounding by ~eps/h^4.
  CHECK(worst <= 1e-5);

  // Perturbed profile against an independently coded oracle: u'' from the
  // closed form of the correction, then a hand-written central stencil.
  MomentumProfile pert = p;
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    pert.correction[i] = 0.02 * (1.0 - x * x) * (1.0 - x * x);
  }
  const Samples s1 = abreu_scalar_curvature(pert);
  std::vector<double> winv(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    const double upp_exact =
        guillemin_upp(2.0, x) + 0.02 * (12.0 * x * x - 4.0);
    winv[i] = 1.0 / upp_exact;
  }
  worst = 0.0;
  for (int i = 3; i < g.M - 3; ++i) {
    const double oracle = -0.5 *
                          (-winv[i - 2] + 16 * winv[i - 1] - 30 * winv[i] +
                           16 * winv[i + 1] - winv[i + 2]) /
                          (12 * g.h * g.h);
    worst = std::max(worst, std::fabs(s1[i] - oracle));
  }
  CHECK(worst <= 1e-6);

  MomentumProfile bad = p;
  for (int i = 0; i < g.M; ++i) bad.correction[i] = -3.0 * g.x[i] * g.x[i];
  CHECK_THROWS_AS(abreu_scalar_curvature(bad), LostConvexity);
}

TEST_CASE("Legendre round-trip reproduces the symplectic potential") {
  const Grid g(512);
  MomentumProfile p;
  p.grid = g;
  p.class_scale = 2.5;
  p.correction.resize(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double x = g.x[i];
    p.correction[i] = 0.08 * (1.0 - x * x) * (1.0 - x * x);
  }
  const Samples f = to_kahler_potential(p);
  const MomentumProfile back = from_kahler_potential(g, f, p.class_scale);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    if (std::fabs(g.x[i]) > 0.8) continue;  // interior comparison
    worst = std::max(worst, std::fabs(back.correction[i] - p.correction[i]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("fiber dHYM solution is exact and validates its phase") {
  const Grid g(128);
  InvariantForm omega{g, Samples(g.M, 1.0), 2.0};
  const InvariantForm b0 = dhym_fiber_solution(omega, M_PI / 2);
  for (double b : b0.w) CHECK(std::abs(b) <= 1e-15);
  const InvariantForm b1 = dhym_fiber_solution(omega, M_PI / 4);
  for (int i = 0; i < g.M; ++i) {
    CHECK(b1.w[i] == doctest::Approx(omega.w[i]));
  }
  for (double th : {0.3, 1.2, 2.4}) {
    const InvariantForm b = dhym_fiber_solution(omega, th);
    for (int i = 0; i < g.M; ++i) {
      CHECK(arccot(b.w[i] / omega.w[i]) == doctest::Approx(th).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(dhym_fiber_solution(omega, 3.5), PhaseOutOfRange);
}

TEST_CASE("holomorphy pair solves both kernel equations") {
  const Grid g(256);
  MomentumProfile p;
  p.grid = g;
  p.class_scale = 2.0;
  p.correction.assign(g.M, 0.0);

  const Samples zero = holomorphy_potential(p, 0.0);
  for (double z : zero) CHECK(z == 0.0);

  const Samples v = holomorphy_potential(p, 1.0);
  for (int i = 0; i < g.M; ++i) {
    CHECK(v[i] == doctest::Approx(g.x[i]).epsilon(1e-12));
  }

  // B = k omega: companion = k x, and both kernel equations hold.
  const double k = 1.7;
  const Samples w(g.M, 1.0);
  Samples b(g.M, k);
  const Samples u = companion_potential(g, b, w, 1.0);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    worst = std::max(worst, std::fabs(u[i] - k * v[i]));
  }
  CHECK(worst <= 1e-10);

  // First kernel equation: d/dx (v' / w) = 0; second: u' = (v'/w) b.
  const Samples vp = deriv(g, v);
  const Samples up = deriv(g, u);
  Samples ratio(g.M), res2(g.M);
  for (int i = 0; i < g.M; ++i) {
    ratio[i] = vp[i] / w[i];
    res2[i] = up[i] - ratio[i] * b[i];
  }
  const Samples dratio = deriv(g, ratio);
  Samples r1(g.M), r2(g.M);
  for (int i = 0; i < g.M; ++i) {
    r1[i] = (1.0 - g.x[i] * g.x[i]) * dratio[i];
    r2[i] = res2[i];
  }
  Samples abs1(g.M), abs2(g.M);
  for (int i = 0; i < g.M; ++i) {
    abs1[i] = std::fabs(r1[i]);
    abs2[i] = std::fabs(r2[i]);
  }
  CHECK(quad(g, abs1) <= 1e-10);
  CHECK(quad(g, abs2) <= 1e-10);
}

TEST_CASE("reference construction matches the closed class constants") {
  const Cp1Reference ref = make_reference(128, 2.0, 3.0, 0.7);
  CHECK(ref.class_data.theta_hat == doctest::Approx(std::atan2(1.0, 3.0)));
  CHECK(ref.class_data.c_gamma ==
        doctest::Approx(1.0 - 0.7 * std::sqrt(10.0)).epsilon(1e-12));
  // Round solution: s - c = |gamma| r exactly.
  const Samples curv = curvature_density(ref.omega0.grid, ref.omega0.w);
  const double lhs = curv[64] - ref.class_data.c_gamma;
  CHECK(lhs == doctest::Approx(0.7 * std::sqrt(10.0)).epsilon(1e-8));
}

TEST_CASE("futaki invariant: vanishing, representative independence, linearity") {
  const Cp1Reference ref = make_reference(384, 2.0, 2.0, 1.0);
  const Grid& g = ref.omega0.grid;

  const Complex f0 = futaki_invariant(ref.omega0, ref.b0, ref.class_data);
  CHECK(std::abs(f0) <= 1e-8);

  // Linearity in the generator coefficient.
  const Complex f2 =
      futaki_invariant(ref.omega0, ref.b0, ref.class_data, 2.0);
  CHECK(std::abs(f2 - 2.0 * f0) <= 1e-10);

  // Independence of the representatives: displace both forms by smooth
  // potentials and compare.
  Rng rng(77);
  Complex prev = f0;
  for (int trial = 0; trial < 5; ++trial) {
    const Samples fv = bump_potential(g, rng, 0.1);
    const Samples fu = bump_potential(g, rng, 0.1);
    InvariantForm omega = ref.omega0;
    InvariantForm b = ref.b0;
    const Samples dv = ddbar_density(g, fv);
    const Samples du = ddbar_density(g, fu);
    for (int i = 0; i < g.M; ++i) {
      omega.w[i] += dv[i];
      b.w[i] += du[i];
    }
    const Complex f = futaki_invariant(omega, b, ref.class_data);
    CHECK(std::abs(f - prev) <= 1e-6);
    prev = f;
  }
}

TEST_CASE("trivial geodesics: constant when unscaled, reject bad B-fields") {
  const Grid g(128);
  MomentumProfile p;
  p.grid = g;
  p.class_scale = 2.0;
  p.correction.assign(g.M, 0.0);
  InvariantForm b{g, Samples(g.M, 0.8), 1.6};

  std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  const Path path = trivial_geodesic_path(p, 0.0, b, times);
  for (const auto& s : path.samples) {
    for (int i = 0; i < g.M; ++i) {
      CHECK(std::abs(s.u[i]) <= 1e-14);
      CHECK(std::abs(s.v[i]) <= 1e-14);
    }
  }

  InvariantForm bad = b;
  for (int i = 0; i < g.M; ++i) bad.w[i] += 0.05 * g.x[i];
  CHECK_THROWS_AS(trivial_geodesic_path(p, 1.0, bad, times), NotDHYMSolution);
}

TEST_CASE("entropy and K-energy vanish at the reference") {
  const Cp1Reference ref = make_reference(128, 2.0, 1.0, 1.0);
  const Grid& g = ref.omega0.grid;
  CHECK(std::abs(entropy(ref, Samples(g.M, 0.0))) <= 1e-12);
  Potential phi{Samples(g.M, 0.0), Samples(g.M, 0.0)};
  CHECK(std::abs(complexified_k_energy(ref, phi)) <= 1e-12);

  // Jensen: entropy of a displaced metric is nonnegative.
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Samples f = bump_potential(g, rng, 0.1);
    CHECK(entropy(ref, f) >= -1e-10);
  }
}
