#include "cklab/surface.hpp"

#include <cmath>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab {

namespace {

double class_volume(const Matrix& rep) {
  // 2! det for a constant 2x2 representative under the torus normalization.
  return 2.0 * (rep(0, 0) * rep(1, 1) - rep(0, 1) * rep(1, 0)).real();
}

}  // namespace

SurfacePair make_surface_pair(ScalarField u, ScalarField v, Matrix omega_class,
                              Matrix chi_class, double gamma_tilde) {
  if (u.grid.n != 2) {
    throw DimensionMismatch("surface system lives on the n = 2 torus");
  }
  const double va = class_volume(omega_class);
  const double vb = class_volume(chi_class);
  if (std::abs(va - vb) > 1e-12 * std::abs(va)) {
    throw VolumeMismatch("surface pair: int chi^2 != int omega^2");
  }
  make_mean_zero(u);
  make_mean_zero(v);
  SurfacePair sp{std::move(u), std::move(v), std::move(omega_class),
                 std::move(chi_class), gamma_tilde};
  require_positive(omega_of(sp), "surface pair omega");
  require_positive(chi_of(sp), "surface pair chi");
  return sp;
}

FormField omega_of(const SurfacePair& sp) {
  return assemble_form(sp.omega_class, &sp.u, true);
}

FormField chi_of(const SurfacePair& sp) {
  return assemble_form(sp.chi_class, &sp.v, true);
}

FormField chi_change_of_variables(const FormField& bfield,
                                  const FormField& metric, double theta_hat) {
  const double st = std::sin(theta_hat);
  if (std::abs(st) <= 1e-12) {
    throw DegeneratePhase("chi change of variables: sin(theta_hat) ~ 0");
  }
  const double ct = std::cos(theta_hat);
  FormField out(bfield.grid, false);
  for (int c = 0; c < bfield.ncomp(); ++c) {
    for (std::size_t p = 0; p < out.comp[c].size(); ++p) {
      out.comp[c][p] = st * bfield.comp[c][p] - ct * metric.comp[c][p];
    }
  }
  return out;
}

double surface_constant(const SurfacePair& sp) {
  // int (s(omega) - c - gamma Lambda_omega chi) omega^2 = 0, evaluated by
  // quadrature at the pair itself (class-level, representative-free).
  const FormField w = omega_of(sp);
  const FormField x = chi_of(sp);
  const ScalarField s = scalar_curvature(w);
  const ScalarField tr = metric_trace(w, x);
  const std::vector<double> dets = det_field(w);
  std::vector<double> num(dets.size()), den(dets.size());
  for (std::size_t p = 0; p < dets.size(); ++p) {
    num[p] = (s[p] - sp.gamma_tilde * tr[p]) * dets[p];
    den[p] = dets[p];
  }
  return top_integral(w.grid, num) / top_integral(w.grid, den);
}

double m_prime(const SurfacePair& sp) {
  const double c = surface_constant(sp);
  const FormField wu = omega_of(sp);
  const std::vector<double> detu = det_field(wu);

  const double h = entropy(sp.u, sp.omega_class);
  const double e_alpha = energy_family(sp.u, sp.omega_class);
  const double e_beta = energy_family(sp.v, sp.chi_class);

  FormField chi0(sp.u.grid, false);
  chi0.comp[0].assign(sp.u.size(), sp.chi_class(0, 0).real());
  chi0.comp[1].assign(sp.u.size(), sp.chi_class(1, 1).real());
  chi0.comp[2].assign(sp.u.size(), sp.chi_class(0, 1).real());
  chi0.comp[3].assign(sp.u.size(), sp.chi_class(0, 1).imag());
  const double e_twist = energy_family(sp.u, sp.omega_class, &chi0);

  std::vector<double> dens(sp.u.size());
  for (std::size_t p = 0; p < sp.u.size(); ++p) dens[p] = sp.v[p] * detu[p];
  const double v_against_wu = top_integral(sp.u.grid, dens);

  // Flat reference: the Ricci-twisted term vanishes.
  return h + c / 3.0 * e_alpha -
         sp.gamma_tilde * (e_beta / 3.0 - e_twist - v_against_wu);
}

std::vector<double> default_mu(const SurfacePair& sp) {
  const double target = class_volume(sp.omega_class);
  const std::size_t np = sp.u.grid.points();
  // Flat reference volume, rescaled to total mass alpha^2: the constant
  // det-valued density target / 2.
  return std::vector<double>(np, target / 2.0);
}

double f_mu(const SurfacePair& sp, const std::vector<double>& mu) {
  const double total = top_integral(sp.u.grid, mu);
  const double target = class_volume(sp.omega_class);
  if (std::abs(total - target) > 1e-8 * std::abs(target)) {
    throw VolumeMismatch("f_mu: int mu != alpha^2");
  }
  std::vector<double> du(mu.size()), dv(mu.size());
  for (std::size_t p = 0; p < mu.size(); ++p) {
    du[p] = sp.u[p] * mu[p];
    dv[p] = sp.v[p] * mu[p];
  }
  const double u_mu = top_integral(sp.u.grid, du);
  const double v_mu = top_integral(sp.u.grid, dv);
  const double e_alpha = energy_family(sp.u, sp.omega_class);
  const double e_beta = energy_family(sp.v, sp.chi_class);
  return u_mu - e_alpha / 3.0 +
         0.5 * sp.gamma_tilde * (v_mu - e_beta / 3.0);
}

QResult hessian_q_apply(const SurfacePair& sp, const ScalarField& a,
                        const ScalarField& b) {
  const FormField w = omega_of(sp);
  const FormField x = chi_of(sp);
  const ScalarField lich = lichnerowicz_op(a, w);

  VectorFieldC diff = gradc(x, b);
  const VectorFieldC ga = gradc(w, a);
  for (int j = 0; j < w.grid.n; ++j) {
    for (std::size_t p = 0; p < a.size(); ++p) {
      diff.z[j].re[p] -= ga.z[j].re[p];
      diff.z[j].im[p] -= ga.z[j].im[p];
    }
  }
  const VectorFieldC moved = transfer(w, x, diff);
  const ScalarField div_t = div_omega(w, moved);
  const ScalarField div_d = div_omega(w, diff);

  QResult out{a, b};
  const double half_g = 0.5 * sp.gamma_tilde;
  for (std::size_t p = 0; p < a.size(); ++p) {
    out.first[p] = lich[p] + half_g * div_t[p];
    out.second[p] = -half_g * div_d[p];
  }
  return out;
}

double l2_pairing(const SurfacePair& sp, const ScalarField& a,
                  const ScalarField& b, const ScalarField& c,
                  const ScalarField& d) {
  const FormField w = omega_of(sp);
  const std::vector<double> dets = det_field(w);
  std::vector<double> dens(a.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    dens[p] = (a[p] * c[p] + b[p] * d[p]) * dets[p];
  }
  return top_integral(a.grid, dens);
}

double hessian_symmetric_form(const SurfacePair& sp, const ScalarField& a,
                              const ScalarField& b, const ScalarField& c,
                              const ScalarField& d) {
  const FormField w = omega_of(sp);
  const FormField x = chi_of(sp);
  const std::vector<double> dets = det_field(w);

  const double lich = lichnerowicz_pairing(a, c, w);

  const ScalarField gx_bd = metric_dual_pairing(x, b, d);
  const ScalarField gw_bc = metric_dual_pairing(w, b, c);
  const ScalarField gw_ad = metric_dual_pairing(w, a, d);
  const ScalarField gx_ac_vec = vector_pairing(x, gradc(w, a), gradc(w, c));

  std::vector<double> dens(a.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    dens[p] = (gx_bd[p] + gx_ac_vec[p] - gw_bc[p] - gw_ad[p]) * dets[p];
  }
  return lich + 0.5 * sp.gamma_tilde * top_integral(a.grid, dens);
}

}  // namespace cklab
