#include "cklab/cp1.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"
#include "cklab/pointwise.hpp"

namespace cklab::cp1 {

namespace {

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
// weights[d][j] multiplies f(nodes[j]) in the d-th derivative at x0.
std::vector<std::vector<double>> fd_weights(double x0,
                                            const std::vector<double>& nodes,
                                            int maxd) {
  const int nn = static_cast<int>(nodes.size());
  std::vector<std::vector<std::vector<double>>> c(
      maxd + 1, std::vector<std::vector<double>>(nn, std::vector<double>(nn, 0.0)));
  c[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < nn; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      for (int d = 0; d <= std::min(i, maxd); ++d) {
        c[d][i][j] = ((nodes[i] - x0) * c[d][i - 1][j] -
                      (d > 0 ? d * c[d - 1][i - 1][j] : 0.0)) /
                     c3;
      }
    }
    for (int d = 0; d <= std::min(i, maxd); ++d) {
      c[d][i][i] = c1 / c2 *
                   ((d > 0 ? d * c[d - 1][i - 1][i - 1] : 0.0) -
                    (nodes[i - 1] - x0) * c[d][i - 1][i - 1]);
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> out(maxd + 1, std::vector<double>(nn));
  for (int d = 0; d <= maxd; ++d) {
    for (int j = 0; j < nn; ++j) out[d][j] = c[d][nn - 1][j];
  }
  return out;
}

constexpr int kEdge = 3;  // nodes near each end that use one-sided stencils
constexpr int kEdgeStencil = 7;

Samples deriv_impl(const Grid& g, const Samples& f, int order) {
  const int m = g.M;
  Samples out(m, 0.0);
  const double h = g.h;
  // Central 4th-order stencils in the bulk.
  if (order == 1) {
    const double s = 1.0 / (12.0 * h);
    for (int i = 2; i < m - 2; ++i) {
      out[i] = s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
  } else {
    const double s = 1.0 / (12.0 * h * h);
    for (int i = 2; i < m - 2; ++i) {
      out[i] = s * (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] +
                    16.0 * f[i + 1] - f[i + 2]);
    }
  }
  // One-sided stencils near the ends.
  std::vector<double> nodes(kEdgeStencil);
  for (int i = 0; i < std::min(kEdge, m); ++i) {
    for (int j = 0; j < kEdgeStencil; ++j) nodes[j] = g.x[j];
    const auto w = fd_weights(g.x[i], nodes, order);
    double acc = 0.0;
    for (int j = 0; j < kEdgeStencil; ++j) acc += w[order][j] * f[j];
    out[i] = acc;
  }
  for (int i = std::max(m - kEdge, 0); i < m; ++i) {
    for (int j = 0; j < kEdgeStencil; ++j) nodes[j] = g.x[m - kEdgeStencil + j];
    const auto w = fd_weights(g.x[i], nodes, order);
    double acc = 0.0;
    for (int j = 0; j < kEdgeStencil; ++j) acc += w[order][j] * f[m - kEdgeStencil + j];
    out[i] = acc;
  }
  return out;
}

double extrapolate_left(const Samples& f) {
  return 4.0 * f[0] - 6.0 * f[1] + 4.0 * f[2] - f[3];
}

double extrapolate_right(const Samples& f) {
  const std::size_t m = f.size();
  return 4.0 * f[m - 1] - 6.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4];
}

// Integral over [a, b] of the Lagrange cubic through (xs[j], f[j]), exact via
// 3-point Gauss-Legendre.
std::array<double, 4> panel_weights(const std::array<double, 4>& xs, double a,
                                    double b) {
  static const double gx[3] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};
  for (int q = 0; q < 3; ++q) {
    const double t = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
    const double jac = 0.5 * (b - a) * gw[q];
    for (int j = 0; j < 4; ++j) {
      double basis = 1.0;
      for (int k = 0; k < 4; ++k) {
        if (k != j) basis *= (t - xs[k]) / (xs[j] - xs[k]);
      }
      w[j] += jac * basis;
    }
  }
  return w;
}

}  // namespace

Samples deriv(const Grid& g, const Samples& f) { return deriv_impl(g, f, 1); }
Samples deriv2(const Grid& g, const Samples& f) { return deriv_impl(g, f, 2); }

double quad(const Grid& g, const Samples& f) {
  const int m = g.M;
  std::vector<double> full(m + 2);
  full[0] = extrapolate_left(f);
  std::copy(f.begin(), f.end(), full.begin() + 1);
  full[m + 1] = extrapolate_right(f);
  const int intervals = m + 1;
  const double h = g.h;
  double total = 0.0;
  int simpson_end = intervals;  // node index bound for the Simpson part
  if (intervals % 2 != 0) simpson_end = intervals - 3;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    total += h / 3.0 * (full[i] + 4.0 * full[i + 1] + full[i + 2]);
  }
  if (intervals % 2 != 0) {
    const int i = simpson_end;
    total += 3.0 * h / 8.0 *
             (full[i] + 3.0 * full[i + 1] + 3.0 * full[i + 2] + full[i + 3]);
  }
  return total;
}

Complex quad(const Grid& g, const std::vector<Complex>& f) {
  Samples re(f.size()), im(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  return {quad(g, re), quad(g, im)};
}

Samples cumint(const Grid& g, const Samples& f) {
  const int m = g.M;
  Samples out(m);
  // First panel [-1, x_0] integrates the cubic through the first four nodes.
  {
    const std::array<double, 4> xs{g.x[0], g.x[1], g.x[2], g.x[3]};
    const auto w = panel_weights(xs, -1.0, g.x[0]);
    out[0] = w[0] * f[0] + w[1] * f[1] + w[2] * f[2] + w[3] * f[3];
  }
  for (int i = 0; i + 1 < m; ++i) {
    const int base = std::clamp(i - 1, 0, m - 4);
    const std::array<double, 4> xs{g.x[base], g.x[base + 1], g.x[base + 2],
                                   g.x[base + 3]};
    const auto w = panel_weights(xs, g.x[i], g.x[i + 1]);
    out[i + 1] = out[i] + w[0] * f[base] + w[1] * f[base + 1] +
                 w[2] * f[base + 2] + w[3] * f[base + 3];
  }
  return out;
}

double mean_zero_shift(const Grid& g, Samples& f) {
  const double mu = quad(g, f) / 2.0;
  for (double& v : f) v -= mu;
  return mu;
}

Samples ddbar_density(const Grid& g, const Samples& f) {
  Samples fp = deriv(g, f);
  for (int i = 0; i < g.M; ++i) fp[i] *= (1.0 - g.x[i] * g.x[i]);
  Samples out = deriv(g, fp);
  for (double& v : out) v *= 0.5;
  return out;
}

Samples curvature_density(const Grid& g, const Samples& w) {
  Samples logw(g.M);
  for (int i = 0; i < g.M; ++i) {
    if (w[i] <= 0.0) throw LostPositivity("curvature_density: w <= 0", i);
    logw[i] = std::log(w[i]);
  }
  Samples term = deriv(g, logw);
  for (int i = 0; i < g.M; ++i) term[i] *= (1.0 - g.x[i] * g.x[i]);
  Samples dterm = deriv(g, term);
  Samples s(g.M);
  for (int i = 0; i < g.M; ++i) s[i] = -(dterm[i] - 2.0) / (2.0 * w[i]);
  return s;
}

Samples grad_norm_sq(const Grid& g, const Samples& f, const Samples& w) {
  Samples fp = deriv(g, f);
  Samples out(g.M);
  for (int i = 0; i < g.M; ++i) {
    out[i] = fp[i] * fp[i] * (1.0 - g.x[i] * g.x[i]) / (2.0 * w[i]);
  }
  return out;
}

double guillemin_u(double s, double y) {
  return 0.25 * s *
         ((1.0 + y) * std::log1p(y) + (1.0 - y) * std::log1p(-y));
}

double guillemin_upp(double s, double y) { return 0.5 * s / (1.0 - y * y); }

Samples profile_upp(const MomentumProfile& p) {
  Samples upp = deriv2(p.grid, p.correction);
  for (int i = 0; i < p.grid.M; ++i) {
    upp[i] += guillemin_upp(p.class_scale, p.grid.x[i]);
  }
  return upp;
}

Samples abreu_scalar_curvature(const MomentumProfile& p) {
  const Samples upp = profile_upp(p);
  Samples winv(p.grid.M);
  for (int i = 0; i < p.grid.M; ++i) {
    if (upp[i] <= 0.0) {
      throw LostConvexity("abreu_scalar_curvature: u'' <= 0 at node " +
                          std::to_string(i));
    }
    winv[i] = 1.0 / upp[i];
  }
  Samples out = deriv2(p.grid, winv);
  for (double& v : out) v *= -0.5;
  return out;
}

InvariantForm dhym_fiber_solution(const InvariantForm& omega,
                                  double theta_hat) {
  if (theta_hat <= 0.0 || theta_hat >= M_PI) {
    throw PhaseOutOfRange("dhym_fiber_solution: theta_hat must be in (0, pi)");
  }
  const double c = 1.0 / std::tan(theta_hat);
  InvariantForm b;
  b.grid = omega.grid;
  b.w.resize(omega.w.size());
  for (std::size_t i = 0; i < omega.w.size(); ++i) b.w[i] = c * omega.w[i];
  b.class_scale = c * omega.class_scale;
  return b;
}

Samples holomorphy_potential(const MomentumProfile& p, double coeff) {
  Samples out(p.grid.M);
  for (int i = 0; i < p.grid.M; ++i) out[i] = coeff * p.grid.x[i];
  mean_zero_shift(p.grid, out);
  return out;
}

Samples companion_potential(const Grid& g, const Samples& b, const Samples& w,
                            double coeff) {
  Samples ratio(g.M);
  for (int i = 0; i < g.M; ++i) ratio[i] = coeff * b[i] / w[i];
  Samples out = cumint(g, ratio);
  mean_zero_shift(g, out);
  return out;
}

Complex futaki_invariant(const InvariantForm& omega, const InvariantForm& bfield,
                         const ClassData& cd, double coeff) {
  const Grid& g = omega.grid;
  for (int i = 0; i < g.M; ++i) {
    if (omega.w[i] <= 0.0) {
      throw LostPositivity("futaki_invariant: metric density <= 0", i);
    }
  }
  const Samples s = curvature_density(g, omega.w);
  // Holomorphy potentials of the fixed generator (2 coeff / scale) d/dw:
  // derivative coeff * (2/scale) * density for both forms.
  const double rate = 2.0 * coeff / omega.class_scale;
  Samples v_pot = cumint(g, omega.w);
  Samples u_pot = cumint(g, bfield.w);
  for (int i = 0; i < g.M; ++i) {
    v_pot[i] *= rate;
    u_pot[i] *= rate;
  }
  mean_zero_shift(g, v_pot);
  mean_zero_shift(g, u_pot);

  // The c_gamma term eliminates the additive-constant ambiguity of the
  // potentials (it is the mean-normalization of the curvature pairing), so
  // the value does not depend on the chosen primitives. The map is
  // complex-linear in the generator; on the generator itself, with real
  // potentials, the value is real.
  const Complex gamma = cd.gamma();
  Samples dens(g.M);
  for (int i = 0; i < g.M; ++i) {
    const Complex rho = gamma * Complex(bfield.w[i], omega.w[i]);
    const double resid = rho.real() - (s[i] - cd.c_gamma) * omega.w[i];
    dens[i] = u_pot[i] * rho.imag() + v_pot[i] * resid;
  }
  return {quad(g, dens), 0.0};
}

namespace {

// Cubic Lagrange interpolation on the uniform interior grid.
double interp(const Grid& g, const Samples& f, double x) {
  const int m = g.M;
  int i = static_cast<int>(std::floor((x - g.x[0]) / g.h));
  i = std::clamp(i - 1, 0, m - 4);
  double out = 0.0;
  for (int j = 0; j < 4; ++j) {
    double basis = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (k != j) basis *= (x - g.x[i + k]) / (g.x[i + j] - g.x[i + k]);
    }
    out += basis * f[i + j];
  }
  return out;
}

// Momentum coordinate y(x) of a profile: solves
// arctanh(y) + (2/s) corr'(y) = arctanh(x).
struct ProfileChart {
  const Grid& g;
  double scale;
  Samples corr_deriv;
  bool flat;

  explicit ProfileChart(const MomentumProfile& p)
      : g(p.grid), scale(p.class_scale), corr_deriv(deriv(p.grid, p.correction)) {
    flat = true;
    for (double v : p.correction) {
      if (v != 0.0) {
        flat = false;
        break;
      }
    }
  }

  double xi_of_y(double y) const {
    double xi = std::atanh(y);
    if (!flat) xi += (2.0 / scale) * interp(g, corr_deriv, y);
    return xi;
  }

  double y_of_xi(double xi) const {
    if (flat) return std::tanh(xi);
    double lo = -1.0 + 1e-14, hi = 1.0 - 1e-14;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (xi_of_y(mid) < xi) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace

Path trivial_geodesic_path(const MomentumProfile& start, double affine_coeff,
                           const InvariantForm& bfield,
                           const std::vector<double>& times) {
  const Grid& g = start.grid;
  const double s = start.class_scale;
  const ProfileChart chart(start);

  // Metric density in the fixed chart.
  Samples w(g.M);
  const Samples upp = profile_upp(start);
  for (int i = 0; i < g.M; ++i) {
    const double y = chart.y_of_xi(std::atanh(g.x[i]));
    const double uppy = chart.flat ? upp[i] : guillemin_upp(s, y) +
                          interp(g, deriv2(g, start.correction), y);
    w[i] = 0.25 * s * s / ((1.0 - g.x[i] * g.x[i]) * uppy);
  }

  // The pair must solve the fiber equation: constant pointwise phase.
  Samples theta(g.M);
  for (int i = 0; i < g.M; ++i) theta[i] = arccot(bfield.w[i] / w[i]);
  const double theta_bar = quad(g, theta) / 2.0;
  double dev = 0.0;
  for (double t : theta) dev = std::max(dev, std::fabs(t - theta_bar));
  if (dev > 1e-8) {
    throw NotDHYMSolution(
        "trivial_geodesic_path: bfield does not solve the fiber equation");
  }

  Path path;
  path.grid = g;
  path.times = times;
  const double lambda = bfield.w[g.M / 2] / w[g.M / 2];

  if (chart.flat) {
    // Round start metric: everything is closed-form. The holomorphy pair is
    // (u, v) = a (lambda + i) y with y = x, the flow translates xi at rate
    // a / s, and the path integrates the flow pullbacks.
    path.has_analytic_derivatives = true;
    const double a = affine_coeff;
    for (double t : times) {
      Potential sample, dot, ddot;
      sample.u.resize(g.M);
      sample.v.resize(g.M);
      dot.u.resize(g.M);
      dot.v.resize(g.M);
      ddot.u.resize(g.M);
      ddot.v.resize(g.M);
      for (int i = 0; i < g.M; ++i) {
        const double xi = std::atanh(g.x[i]);
        const double shifted = xi + a * t / s;
        const double base = s * (std::log(std::cosh(shifted)) -
                                 std::log(std::cosh(xi)));
        const double tanh_s = std::tanh(shifted);
        const double sech2 = 1.0 - tanh_s * tanh_s;
        sample.u[i] = lambda * base;
        sample.v[i] = base;
        dot.u[i] = lambda * a * tanh_s;
        dot.v[i] = a * tanh_s;
        ddot.u[i] = lambda * a * a / s * sech2;
        ddot.v[i] = a * a / s * sech2;
      }
      path.samples.push_back(std::move(sample));
      path.dot.push_back(std::move(dot));
      path.ddot.push_back(std::move(ddot));
    }
    return path;
  }

  // General start metric: the flow still translates xi uniformly; the
  // potentials are integrated numerically along the flow.
  Samples vp = cumint(g, w);
  Samples up = cumint(g, bfield.w);
  const double rate = 2.0 * affine_coeff / s;
  for (int i = 0; i < g.M; ++i) {
    vp[i] *= rate;
    up[i] *= rate;
  }
  mean_zero_shift(g, vp);
  mean_zero_shift(g, up);
  const int sub = 32;
  for (double t : times) {
    Potential sample;
    sample.u.assign(g.M, 0.0);
    sample.v.assign(g.M, 0.0);
    const double ds = t / sub;
    for (int i = 0; i < g.M; ++i) {
      const double xi = std::atanh(g.x[i]);
      double au = 0.0, av = 0.0;
      for (int k = 0; k <= sub; ++k) {
        const double sigma = k * ds;
        const double xx = std::tanh(xi + affine_coeff * sigma / s);
        const double wgt = (k == 0 || k == sub) ? 0.5 : 1.0;
        au += wgt * interp(g, up, xx);
        av += wgt * interp(g, vp, xx);
      }
      sample.u[i] = au * ds;
      sample.v[i] = av * ds;
    }
    path.samples.push_back(std::move(sample));
  }
  return path;
}

Path affine_pair_geodesic(double class_scale, double k_ratio, double coeff_u,
                          double coeff_v, const Grid& g,
                          const std::vector<double>& times) {
  Path path;
  path.grid = g;
  path.times = times;
  path.has_analytic_derivatives = true;
  const double s = class_scale;
  const double sb = k_ratio * class_scale;
  for (double t : times) {
    Potential sample, dot, ddot;
    sample.u.resize(g.M);
    sample.v.resize(g.M);
    dot.u.resize(g.M);
    dot.v.resize(g.M);
    ddot.u.resize(g.M);
    ddot.v.resize(g.M);
    for (int i = 0; i < g.M; ++i) {
      const double xi = std::atanh(g.x[i]);
      const double xv = xi - t * coeff_v;
      const double xu = xi - t * coeff_u;
      sample.v[i] = s * (std::log(std::cosh(xv)) - std::log(std::cosh(xi)));
      sample.u[i] = sb * (std::log(std::cosh(xu)) - std::log(std::cosh(xi)));
      dot.v[i] = -s * coeff_v * std::tanh(xv);
      dot.u[i] = -sb * coeff_u * std::tanh(xu);
      ddot.v[i] = s * coeff_v * coeff_v * (1.0 - std::tanh(xv) * std::tanh(xv));
      ddot.u[i] = sb * coeff_u * coeff_u * (1.0 - std::tanh(xu) * std::tanh(xu));
    }
    path.samples.push_back(std::move(sample));
    path.dot.push_back(std::move(dot));
    path.ddot.push_back(std::move(ddot));
  }
  return path;
}

Cp1Reference make_reference(int M, double class_scale, double k_ratio,
                            double gamma_abs) {
  Cp1Reference ref;
  ref.omega0.grid = Grid(M);
  ref.omega0.w.assign(M, 0.5 * class_scale);
  ref.omega0.class_scale = class_scale;
  ref.b0.grid = ref.omega0.grid;
  ref.b0.w.assign(M, 0.5 * class_scale * k_ratio);
  ref.b0.class_scale = class_scale * k_ratio;
  Matrix alpha(1, 1), beta(1, 1), c1(1, 1);
  alpha(0, 0) = class_scale;
  beta(0, 0) = k_ratio * class_scale;
  c1(0, 0) = 2.0;
  ref.class_data = class_constants(alpha, beta, gamma_abs, &c1);
  return ref;
}

Samples metric_density(const Cp1Reference& ref, const Samples& v) {
  Samples w = ddbar_density(ref.omega0.grid, v);
  for (int i = 0; i < ref.omega0.grid.M; ++i) {
    w[i] += ref.omega0.w[i];
    if (w[i] <= 0.0) {
      throw LostPositivity("cp1 metric density lost positivity", i);
    }
  }
  return w;
}

Samples bfield_density(const Cp1Reference& ref, const Samples& u) {
  Samples b = ddbar_density(ref.b0.grid, u);
  for (int i = 0; i < ref.b0.grid.M; ++i) b[i] += ref.b0.w[i];
  return b;
}

double entropy(const Cp1Reference& ref, const Samples& v) {
  const Grid& g = ref.omega0.grid;
  const Samples wv = metric_density(ref, v);
  Samples dens(g.M);
  for (int i = 0; i < g.M; ++i) {
    dens[i] = std::log(wv[i] / ref.omega0.w[i]) * wv[i];
  }
  return quad(g, dens);
}

double complexified_k_energy(const Cp1Reference& ref, const Potential& phi) {
  const Grid& g = ref.omega0.grid;
  const Samples wv = metric_density(ref, phi.v);
  const Samples bu = bfield_density(ref, phi.u);
  const ClassData& cd = ref.class_data;

  Samples hd(g.M), ed(g.M), ricd(g.M);
  std::vector<Complex> ecd(g.M);
  const double ric0 = 1.0;  // s(round) * w(round) = (2/s)(s/2)
  for (int i = 0; i < g.M; ++i) {
    hd[i] = std::log(wv[i] / ref.omega0.w[i]) * wv[i];
    ed[i] = phi.v[i] * (ref.omega0.w[i] + wv[i]);
    ricd[i] = phi.v[i] * ric0;
    const Complex rho0(ref.b0.w[i], ref.omega0.w[i]);
    const Complex rho(bu[i], wv[i]);
    ecd[i] = Complex(phi.u[i], phi.v[i]) * (rho0 + rho);
  }
  const double h = quad(g, hd);
  const double e = quad(g, ed);
  const double eric = quad(g, ricd);
  const Complex ec = quad(g, ecd);
  return h + 0.5 * cd.c_gamma * e - eric + 0.5 * (cd.gamma() * ec).imag();
}

double first_variation(const Cp1Reference& ref, const Potential& phi,
                       const Potential& dir) {
  const Grid& g = ref.omega0.grid;
  const Samples wv = metric_density(ref, phi.v);
  const Samples bu = bfield_density(ref, phi.u);
  const Samples s = curvature_density(g, wv);
  const ClassData& cd = ref.class_data;
  const Complex gamma = cd.gamma();
  Samples dens(g.M);
  for (int i = 0; i < g.M; ++i) {
    const Complex rho = gamma * Complex(bu[i], wv[i]);
    dens[i] = dir.u[i] * rho.imag() +
              dir.v[i] * (rho.real() - (s[i] - cd.c_gamma) * wv[i]);
  }
  return quad(g, dens);
}

void write_profile_csv(const std::string& path, const Cp1Reference& ref,
                       const Samples& u, const Samples& v) {
  const Grid& g = ref.omega0.grid;
  const Samples wv = metric_density(ref, v);
  const Samples bu = bfield_density(ref, u);
  const Samples s = curvature_density(g, wv);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os.precision(17);
  os << "x,w,b,s,theta\n";
  for (int i = 0; i < g.M; ++i) {
    os << g.x[i] << ',' << wv[i] << ',' << bu[i] << ',' << s[i] << ','
       << arccot(bu[i] / wv[i]) << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

Samples to_kahler_potential(const MomentumProfile& p) {
  const Grid& g = p.grid;
  const ProfileChart chart(p);
  Samples out(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double xi = std::atanh(g.x[i]);
    const double y = chart.y_of_xi(xi);
    const double u = guillemin_u(p.class_scale, y) +
                     (chart.flat ? 0.0 : interp(g, p.correction, y));
    out[i] = 0.5 * p.class_scale * y * xi - u;
  }
  return out;
}

MomentumProfile from_kahler_potential(const Grid& g, const Samples& fvals,
                                      double class_scale) {
  // F'(xi) = x_tilde; invert the monotone map xi -> F'(xi) at each node.
  Samples df_dx = deriv(g, fvals);
  Samples xtilde(g.M);
  for (int i = 0; i < g.M; ++i) {
    xtilde[i] = df_dx[i] * (1.0 - g.x[i] * g.x[i]);  // dF/dxi
  }
  MomentumProfile p;
  p.grid = g;
  p.class_scale = class_scale;
  p.correction.assign(g.M, 0.0);
  for (int i = 0; i < g.M; ++i) {
    const double target = 0.5 * class_scale * g.x[i];  // x_tilde at node y
    double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (interp(g, xtilde, mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double xs = 0.5 * (lo + hi);
    const double xi = std::atanh(xs);
    const double u = target * xi - interp(g, fvals, xs);
    p.correction[i] = u - guillemin_u(class_scale, g.x[i]);
  }
  return p;
}

}  // namespace cklab::cp1
