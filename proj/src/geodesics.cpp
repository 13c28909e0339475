#include "cklab/geodesics.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab {

namespace {

void check_path(std::size_t nsamples, int t_index) {
  if (nsamples < 3) throw Error("path needs at least 3 time samples");
  if (t_index < 1 || t_index + 1 >= static_cast<int>(nsamples)) {
    throw Error("t_index must be interior");
  }
}

struct TorusDerivs {
  ScalarField ud, vd, udd, vdd;
};

TorusDerivs derivs_at(const TorusPath& path, int k,
                      bool force_discrete = false) {
  const double dt = path.times[1] - path.times[0];
  TorusDerivs out;
  if (path.has_analytic_derivatives && !force_discrete) {
    out.ud = path.dot[k].u;
    out.vd = path.dot[k].v;
    out.udd = path.ddot[k].u;
    out.vdd = path.ddot[k].v;
    return out;
  }
  const auto& prev = path.samples[k - 1];
  const auto& cur = path.samples[k];
  const auto& next = path.samples[k + 1];
  out.ud = cur.u;
  out.vd = cur.v;
  out.udd = cur.u;
  out.vdd = cur.v;
  for (std::size_t p = 0; p < cur.u.size(); ++p) {
    out.ud[p] = (next.u[p] - prev.u[p]) / (2.0 * dt);
    out.vd[p] = (next.v[p] - prev.v[p]) / (2.0 * dt);
    out.udd[p] = (next.u[p] - 2.0 * cur.u[p] + prev.u[p]) / (dt * dt);
    out.vdd[p] = (next.v[p] - 2.0 * cur.v[p] + prev.v[p]) / (dt * dt);
  }
  return out;
}

// G-orthonormal eigenframe of the 2x2 Hermitian-definite pencil (G, B):
// columns v[.][c] satisfy V^* G V = I and V^* B V = diag(lam).
struct Frame2 {
  double lam[2];
  Complex v[2][2];
};

Frame2 pencil_frame(double g11, double g22, Complex g12, double b11,
                    double b22, Complex b12) {
  Frame2 f;
  const double detg = g11 * g22 - std::norm(g12);
  const double detb = b11 * b22 - std::norm(b12);
  const double mix =
      0.5 * (g11 * b22 + g22 * b11) - (g12 * std::conj(b12)).real();
  double disc = mix * mix - detg * detb;
  disc = disc > 0.0 ? disc : 0.0;
  const double s = std::sqrt(disc);
  f.lam[0] = (mix - s) / detg;
  f.lam[1] = (mix + s) / detg;

  const double scale = std::abs(b11) + std::abs(b22) + 2.0 * std::abs(b12) +
                       (std::fabs(f.lam[0]) + std::fabs(f.lam[1])) *
                           (g11 + g22 + 2.0 * std::abs(g12)) +
                       1e-300;
  auto gmul = [&](const Complex x[2], Complex out[2]) {
    out[0] = g11 * x[0] + g12 * x[1];
    out[1] = std::conj(g12) * x[0] + g22 * x[1];
  };
  for (int c = 0; c < 2; ++c) {
    const double lam = f.lam[c];
    const Complex r1[2] = {b11 - lam * g11, b12 - lam * g12};
    const Complex r2[2] = {std::conj(b12) - lam * std::conj(g12),
                           b22 - lam * g22};
    const double n1 = std::abs(r1[0]) + std::abs(r1[1]);
    const double n2 = std::abs(r2[0]) + std::abs(r2[1]);
    Complex x[2];
    if (std::max(n1, n2) < 1e-10 * scale) {
      x[0] = (c == 0) ? 1.0 : 0.0;  // proportional pencil: any G-frame works
      x[1] = (c == 0) ? 0.0 : 1.0;
    } else if (n1 >= n2) {
      x[0] = r1[1];
      x[1] = -r1[0];
    } else {
      x[0] = r2[1];
      x[1] = -r2[0];
    }
    f.v[0][c] = x[0];
    f.v[1][c] = x[1];
  }
  // G-orthonormalize (Gram-Schmidt handles the near-degenerate case).
  for (int c = 0; c < 2; ++c) {
    Complex x[2] = {f.v[0][c], f.v[1][c]};
    if (c == 1) {
      Complex gx[2];
      gmul(x, gx);
      const Complex proj =
          std::conj(f.v[0][0]) * gx[0] + std::conj(f.v[1][0]) * gx[1];
      x[0] -= proj * f.v[0][0];
      x[1] -= proj * f.v[1][0];
    }
    Complex gx[2];
    gmul(x, gx);
    const double nrm =
        (std::conj(x[0]) * gx[0] + std::conj(x[1]) * gx[1]).real();
    const double inv = 1.0 / std::sqrt(nrm);
    f.v[0][c] = x[0] * inv;
    f.v[1][c] = x[1] * inv;
  }
  return f;
}

struct FramePoint {
  int n;
  double lam[2];
  double r[2];      // sqrt(1 + lam^2)
  double theta[2];  // arccot(lam)
  Complex comp_u[2], comp_v[2];  // frame components of dz(udot), dz(vdot)
};

// Frame data for every grid point of a torus metric/bfield pair, with the
// gradient components of the two velocity fields.
std::vector<FramePoint> frame_points(const FormField& wv, const FormField& bu,
                                     const ScalarField& ud,
                                     const ScalarField& vd) {
  const TorusGrid& g = wv.grid;
  const std::size_t np = g.points();
  std::vector<FramePoint> out(np);
  std::vector<ComplexField> du, dv;
  for (int j = 0; j < g.n; ++j) {
    du.push_back(dz(ud, j));
    dv.push_back(dz(vd, j));
  }
  for (std::size_t p = 0; p < np; ++p) {
    FramePoint& fp = out[p];
    fp.n = g.n;
    if (g.n == 1) {
      const double gm = wv.comp[0][p];
      fp.lam[0] = bu.comp[0][p] / gm;
      fp.r[0] = std::sqrt(1.0 + fp.lam[0] * fp.lam[0]);
      fp.theta[0] = arccot(fp.lam[0]);
      const double inv = 1.0 / std::sqrt(gm);
      fp.comp_u[0] = du[0].at(p) * inv;
      fp.comp_v[0] = dv[0].at(p) * inv;
      continue;
    }
    const Complex g12(wv.comp[2][p], wv.comp[3][p]);
    const Complex b12(bu.comp[2][p], bu.comp[3][p]);
    const Frame2 fr = pencil_frame(wv.comp[0][p], wv.comp[1][p], g12,
                                   bu.comp[0][p], bu.comp[1][p], b12);
    for (int c = 0; c < 2; ++c) {
      fp.lam[c] = fr.lam[c];
      fp.r[c] = std::sqrt(1.0 + fr.lam[c] * fr.lam[c]);
      fp.theta[c] = arccot(fr.lam[c]);
      fp.comp_u[c] = fr.v[0][c] * du[0].at(p) + fr.v[1][c] * du[1].at(p);
      fp.comp_v[c] = fr.v[0][c] * dv[0].at(p) + fr.v[1][c] * dv[1].at(p);
    }
  }
  return out;
}

}  // namespace

std::vector<double> second_differences(const std::vector<double>& times,
                                       const std::vector<double>& values) {
  const double dt = times[1] - times[0];
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    out.push_back((values[k + 1] - 2.0 * values[k] + values[k - 1]) /
                  (dt * dt));
  }
  return out;
}

SecondVariation second_variation_along_path(const TorusPath& path,
                                            const ClassData& cd, int t_index) {
  check_path(path.samples.size(), t_index);
  const int k = t_index;
  const double dt = path.times[1] - path.times[0];
  const ComplexPotential& phi = path.samples[k];
  const TorusDerivs d = derivs_at(path, k);
  const TorusGrid& grid = phi.u.grid;

  const FormField wv = metric_of(phi, cd);
  const FormField bu = bfield_of(phi, cd);
  const ScalarField s = scalar_curvature(wv);
  const std::vector<double> detv = det_field(wv);
  const ScalarField xnorm = grad_norm_sq(d.vd, wv);
  const Complex gamma = cd.gamma();

  // gamma * det(B + iG) pointwise, the density of gamma (w^C)^n.
  std::vector<Complex> gdetm(grid.points());
  {
    const std::size_t np = grid.points();
    for (std::size_t p = 0; p < np; ++p) {
      Complex det;
      if (grid.n == 1) {
        det = Complex(bu.comp[0][p], wv.comp[0][p]);
      } else {
        const Complex b12(bu.comp[2][p], bu.comp[3][p]);
        const Complex g12(wv.comp[2][p], wv.comp[3][p]);
        const Complex m11(bu.comp[0][p], wv.comp[0][p]);
        const Complex m22(bu.comp[1][p], wv.comp[1][p]);
        const Complex m12 = b12 + Complex(0, 1) * g12;
        const Complex m21 = std::conj(b12) + Complex(0, 1) * std::conj(g12);
        det = m11 * m22 - m12 * m21;
      }
      gdetm[p] = gamma * det;
    }
  }

  const auto frames = frame_points(wv, bu, d.ud, d.vd);
  const std::size_t np = grid.points();
  std::vector<double> dens(np);
  for (std::size_t p = 0; p < np; ++p) {
    const FramePoint& fp = frames[p];
    Complex t_uu = 0.0, t_vv = 0.0, t_uv = 0.0, t_vu = 0.0;
    for (int c = 0; c < fp.n; ++c) {
      const Complex factor =
          std::exp(Complex(0.0, -fp.theta[c])) / fp.r[c];
      t_uu += fp.comp_u[c] * std::conj(fp.comp_u[c]) * factor;
      t_vv += fp.comp_v[c] * std::conj(fp.comp_v[c]) * factor;
      t_uv += fp.comp_u[c] * std::conj(fp.comp_v[c]) * factor;
      t_vu += fp.comp_v[c] * std::conj(fp.comp_u[c]) * factor;
    }
    // Expanded second-variation integrand (dV-density, n! folded into
    // top_integral): the (s - c_gamma) group, the u.. and |del v.|^2 terms,
    // and the two gradient-quadratic wedge groups.
    const double termA = -(d.vdd[p] - xnorm[p]) *
                         ((s[p] - cd.c_gamma) * detv[p] - gdetm[p].real());
    const double termB = d.udd[p] * gdetm[p].imag();
    const double termC = xnorm[p] * gdetm[p].real();
    const Complex wedge_im = gdetm[p] * (t_uu - t_vv);
    const Complex wedge_re = gdetm[p] * (t_vu + t_uv);
    dens[p] = termA + termB + termC - wedge_im.imag() - wedge_re.real();
  }
  SecondVariation out;
  out.analytic = lichnerowicz_seminorm(d.vd, wv) + top_integral(grid, dens);

  const double m_prev = complexified_k_energy(path.samples[k - 1], cd);
  const double m_cur = complexified_k_energy(path.samples[k], cd);
  const double m_next = complexified_k_energy(path.samples[k + 1], cd);
  out.finite_diff = (m_next - 2.0 * m_cur + m_prev) / (dt * dt);
  return out;
}

ResidualPair residual_coupled(const TorusPath& path, const ClassData& cd) {
  ResidualPair out;
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const ComplexPotential& phi = path.samples[k];
    const TorusDerivs d = derivs_at(path, k);
    const FormField wv = metric_of(phi, cd);
    const FormField bu = bfield_of(phi, cd);
    const ScalarField xnorm = grad_norm_sq(d.vd, wv);
    const auto frames = frame_points(wv, bu, d.ud, d.vd);
    const std::size_t np = wv.grid.points();
    std::vector<double> r1(np), r2(np);
    for (std::size_t p = 0; p < np; ++p) {
      r1[p] = d.vdd[p] - xnorm[p];
      const FramePoint& fp = frames[p];
      double theta = 0.0;
      double radius = 1.0;
      Complex w = 0.0;
      for (int c = 0; c < fp.n; ++c) {
        theta += fp.theta[c];
        radius *= fp.r[c];
        const Complex comp_phi = fp.comp_u[c] + Complex(0, 1) * fp.comp_v[c];
        const Complex comp_phi_bar =
            std::conj(fp.comp_u[c]) + Complex(0, 1) * std::conj(fp.comp_v[c]);
        w += comp_phi * comp_phi_bar * std::exp(Complex(0.0, -fp.theta[c])) /
             fp.r[c];
      }
      const Complex phase = std::exp(Complex(0.0, theta - cd.theta_hat));
      const Complex phidd(d.udd[p], d.vdd[p]);
      r2[p] = (radius * phase * (phidd - w)).real();
    }
    out.first.push_back(kernels::sup_abs(r1.data(), np));
    out.second.push_back(kernels::sup_abs(r2.data(), np));
  }
  return out;
}

ResidualPair residual_kahler_pair(const TorusPath& path, const ClassData& cd) {
  ResidualPair out;
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const ComplexPotential& phi = path.samples[k];
    const TorusDerivs d = derivs_at(path, k);
    const FormField wv = metric_of(phi, cd);
    const FormField bt = assemble_form(cd.beta_rep, &phi.u, true);
    const ScalarField xv = grad_norm_sq(d.vd, wv);
    const ScalarField xu = grad_norm_sq(d.ud, bt);
    const std::size_t np = wv.grid.points();
    std::vector<double> r1(np), r2(np);
    for (std::size_t p = 0; p < np; ++p) {
      r1[p] = d.vdd[p] - xv[p];
      r2[p] = d.udd[p] - xu[p];
    }
    out.first.push_back(kernels::sup_abs(r1.data(), np));
    out.second.push_back(kernels::sup_abs(r2.data(), np));
  }
  return out;
}

namespace {

struct AnnulusPoint {
  Complex full;  // (n+1)! det of the full lifted Hessian
  double im;     // (n+1)! det of the imaginary-part lift
};

// n = 1 product-space determinants at one grid point.
AnnulusPoint annulus_point(Complex phidd, double vdd, Complex dzphid,
                           Complex dzbarphid, Complex dzvd, Complex dzbarvd,
                           double gv, Complex mfull) {
  AnnulusPoint out;
  const Complex det_full = 0.25 * phidd * mfull -
                           0.25 * dzbarphid * dzphid;
  out.full = 2.0 * det_full;
  const double det_im =
      0.25 * vdd * gv - 0.25 * (dzbarvd * dzvd).real();
  out.im = 2.0 * det_im;
  return out;
}

}  // namespace

AnnulusResult annulus_residual(const TorusPath& path, const ClassData& cd) {
  const TorusGrid& grid = path.samples.front().u.grid;
  if (grid.n != 1) {
    throw DimensionMismatch("annulus_residual: implemented for n = 1");
  }
  AnnulusResult out;
  const Complex rot = std::exp(Complex(0.0, -(M_PI / 2 + cd.theta_hat)));
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const ComplexPotential& phi = path.samples[k];
    const FormField wv = metric_of(phi, cd);
    const FormField bu = bfield_of(phi, cd);

    // Discrete-time route.
    const TorusDerivs dd = derivs_at(path, k, /*force_discrete=*/true);
    const ComplexField du = dz(dd.ud, 0);
    const ComplexField dv = dz(dd.vd, 0);
    const std::size_t np = grid.points();
    std::vector<double> v_im(np), v_arg(np), v_cal(np), v_idn(np);

    const bool has_analytic = path.has_analytic_derivatives;
    ComplexField dua, dva;
    TorusDerivs da;
    if (has_analytic) {
      da = derivs_at(path, k);
      dua = dz(da.ud, 0);
      dva = dz(da.vd, 0);
    }

    for (std::size_t p = 0; p < np; ++p) {
      const double gv = wv.comp[0][p];
      const Complex mfull(bu.comp[0][p], gv);
      const Complex dzphi = du.at(p) + Complex(0, 1) * dv.at(p);
      const Complex dzbarphi =
          std::conj(du.at(p)) + Complex(0, 1) * std::conj(dv.at(p));
      const Complex dzv = dv.at(p);
      const Complex dzbarv = std::conj(dv.at(p));
      const AnnulusPoint ap =
          annulus_point(Complex(dd.udd[p], dd.vdd[p]), dd.vdd[p], dzphi,
                        dzbarphi, dzv, dzbarv, gv, mfull);
      v_im[p] = ap.im;
      v_arg[p] = (rot * ap.full).imag();
      v_cal[p] = (rot * ap.full).real();
      if (has_analytic) {
        const Complex adzphi = dua.at(p) + Complex(0, 1) * dva.at(p);
        const Complex adzbarphi =
            std::conj(dua.at(p)) + Complex(0, 1) * std::conj(dva.at(p));
        const AnnulusPoint aa = annulus_point(
            Complex(da.udd[p], da.vdd[p]), da.vdd[p], adzphi, adzbarphi,
            dva.at(p), std::conj(dva.at(p)), gv, mfull);
        v_idn[p] = std::abs(ap.full - aa.full);
      }
    }
    out.res_imaginary.push_back(kernels::sup_abs(v_im.data(), np));
    out.res_argument.push_back(kernels::sup_abs(v_arg.data(), np));
    double cal = v_cal[0];
    for (std::size_t p = 1; p < np; ++p) cal = std::min(cal, v_cal[p]);
    out.calibration_min.push_back(cal);
    if (has_analytic) {
      out.identity_err.push_back(kernels::sup_abs(v_idn.data(), np));
    }
  }
  return out;
}

std::vector<double> convexity_probe(
    const TorusPath& path,
    const std::function<double(const ComplexPotential&)>& functional) {
  std::vector<double> values;
  values.reserve(path.samples.size());
  for (const auto& s : path.samples) values.push_back(functional(s));
  return second_differences(path.times, values);
}

std::vector<double> convexity_probe_kenergy(const TorusPath& path,
                                            const ClassData& cd) {
  return convexity_probe(path, [&cd](const ComplexPotential& phi) {
    return complexified_k_energy(phi, cd);
  });
}

// ---- cp1 backend -----------------------------------------------------------

namespace {

struct Cp1Derivs {
  cp1::Samples ud, vd, udd, vdd;
};

Cp1Derivs cp1_derivs_at(const cp1::Path& path, int k,
                        bool force_discrete = false) {
  Cp1Derivs out;
  if (path.has_analytic_derivatives && !force_discrete) {
    out.ud = path.dot[k].u;
    out.vd = path.dot[k].v;
    out.udd = path.ddot[k].u;
    out.vdd = path.ddot[k].v;
    return out;
  }
  const double dt = path.times[1] - path.times[0];
  const int m = path.grid.M;
  out.ud.resize(m);
  out.vd.resize(m);
  out.udd.resize(m);
  out.vdd.resize(m);
  for (int i = 0; i < m; ++i) {
    out.ud[i] = (path.samples[k + 1].u[i] - path.samples[k - 1].u[i]) / (2 * dt);
    out.vd[i] = (path.samples[k + 1].v[i] - path.samples[k - 1].v[i]) / (2 * dt);
    out.udd[i] = (path.samples[k + 1].u[i] - 2 * path.samples[k].u[i] +
                  path.samples[k - 1].u[i]) /
                 (dt * dt);
    out.vdd[i] = (path.samples[k + 1].v[i] - 2 * path.samples[k].v[i] +
                  path.samples[k - 1].v[i]) /
                 (dt * dt);
  }
  return out;
}

// || dbar grad^{1,0} f ||^2 density against the metric w: the kernel is
// exactly the momentum-affine functions.
cp1::Samples cp1_lichnerowicz_density(const cp1::Grid& g, const cp1::Samples& f,
                                      const cp1::Samples& w) {
  cp1::Samples ratio = cp1::deriv(g, f);
  for (int i = 0; i < g.M; ++i) ratio[i] /= w[i];
  cp1::Samples dr = cp1::deriv(g, ratio);
  cp1::Samples out(g.M);
  for (int i = 0; i < g.M; ++i) {
    const double q = 1.0 - g.x[i] * g.x[i];
    out[i] = 0.25 * q * q * dr[i] * dr[i] * w[i];
  }
  return out;
}

}  // namespace

SecondVariation second_variation_along_path(const cp1::Path& path,
                                            const cp1::Cp1Reference& ref,
                                            int t_index) {
  check_path(path.samples.size(), t_index);
  const int k = t_index;
  const cp1::Grid& g = path.grid;
  const double dt = path.times[1] - path.times[0];
  const Cp1Derivs d = cp1_derivs_at(path, k);
  const cp1::Samples wv = cp1::metric_density(ref, path.samples[k].v);
  const cp1::Samples bu = cp1::bfield_density(ref, path.samples[k].u);
  const cp1::Samples s = cp1::curvature_density(g, wv);
  const cp1::Samples xnorm = cp1::grad_norm_sq(g, d.vd, wv);
  const cp1::Samples dud = cp1::deriv(g, d.ud);
  const cp1::Samples dvd = cp1::deriv(g, d.vd);
  const ClassData& cd = ref.class_data;
  const Complex gamma = cd.gamma();

  cp1::Samples dens(g.M);
  const cp1::Samples lich = cp1_lichnerowicz_density(g, d.vd, wv);
  for (int i = 0; i < g.M; ++i) {
    const Complex gdetm = gamma * Complex(bu[i], wv[i]);
    const double lam = bu[i] / wv[i];
    const double r = std::sqrt(1.0 + lam * lam);
    const Complex factor = std::exp(Complex(0.0, -arccot(lam))) / r;
    const double fcomp = (1.0 - g.x[i] * g.x[i]) / (2.0 * wv[i]);
    const double cu = dud[i], cv = dvd[i];
    const Complex t_uu = gdetm * (cu * cu * fcomp) * factor;
    const Complex t_vv = gdetm * (cv * cv * fcomp) * factor;
    const Complex t_cross = gdetm * (2.0 * cu * cv * fcomp) * factor;
    const double termA =
        -(d.vdd[i] - xnorm[i]) * ((s[i] - cd.c_gamma) * wv[i] - gdetm.real());
    const double termB = d.udd[i] * gdetm.imag();
    const double termC = xnorm[i] * gdetm.real();
    dens[i] = lich[i] + termA + termB + termC - (t_uu - t_vv).imag() -
              t_cross.real();
  }
  SecondVariation out;
  out.analytic = cp1::quad(g, dens);
  const double m_prev = cp1::complexified_k_energy(ref, path.samples[k - 1]);
  const double m_cur = cp1::complexified_k_energy(ref, path.samples[k]);
  const double m_next = cp1::complexified_k_energy(ref, path.samples[k + 1]);
  out.finite_diff = (m_next - 2.0 * m_cur + m_prev) / (dt * dt);
  return out;
}

ResidualPair residual_coupled(const cp1::Path& path,
                              const cp1::Cp1Reference& ref) {
  ResidualPair out;
  const cp1::Grid& g = path.grid;
  const ClassData& cd = ref.class_data;
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const Cp1Derivs d = cp1_derivs_at(path, k);
    const cp1::Samples wv = cp1::metric_density(ref, path.samples[k].v);
    const cp1::Samples bu = cp1::bfield_density(ref, path.samples[k].u);
    const cp1::Samples xnorm = cp1::grad_norm_sq(g, d.vd, wv);
    const cp1::Samples dud = cp1::deriv(g, d.ud);
    const cp1::Samples dvd = cp1::deriv(g, d.vd);
    cp1::Samples r1(g.M), r2(g.M);
    for (int i = 0; i < g.M; ++i) {
      r1[i] = d.vdd[i] - xnorm[i];
      const double lam = bu[i] / wv[i];
      const double r = std::sqrt(1.0 + lam * lam);
      const double theta = arccot(lam);
      const double fcomp = (1.0 - g.x[i] * g.x[i]) / (2.0 * wv[i]);
      const Complex comp_phi(dud[i], dvd[i]);
      const Complex w = comp_phi * comp_phi * fcomp *
                        std::exp(Complex(0.0, -theta)) / r;
      const Complex phase = std::exp(Complex(0.0, theta - cd.theta_hat));
      const Complex phidd(d.udd[i], d.vdd[i]);
      r2[i] = (r * phase * (phidd - w)).real();
    }
    out.first.push_back(kernels::sup_abs(r1.data(), r1.size()));
    out.second.push_back(kernels::sup_abs(r2.data(), r2.size()));
  }
  return out;
}

ResidualPair residual_kahler_pair(const cp1::Path& path,
                                  const cp1::Cp1Reference& ref) {
  ResidualPair out;
  const cp1::Grid& g = path.grid;
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const Cp1Derivs d = cp1_derivs_at(path, k);
    const cp1::Samples wv = cp1::metric_density(ref, path.samples[k].v);
    const cp1::Samples bt = cp1::bfield_density(ref, path.samples[k].u);
    for (int i = 0; i < g.M; ++i) {
      if (bt[i] <= 0.0) {
        throw LostPositivity("residual_kahler_pair: B-metric lost positivity",
                             i);
      }
    }
    const cp1::Samples xv = cp1::grad_norm_sq(g, d.vd, wv);
    const cp1::Samples xu = cp1::grad_norm_sq(g, d.ud, bt);
    cp1::Samples r1(g.M), r2(g.M);
    for (int i = 0; i < g.M; ++i) {
      r1[i] = d.vdd[i] - xv[i];
      r2[i] = d.udd[i] - xu[i];
    }
    out.first.push_back(kernels::sup_abs(r1.data(), r1.size()));
    out.second.push_back(kernels::sup_abs(r2.data(), r2.size()));
  }
  return out;
}

AnnulusResult annulus_residual(const cp1::Path& path,
                               const cp1::Cp1Reference& ref) {
  AnnulusResult out;
  const cp1::Grid& g = path.grid;
  const ClassData& cd = ref.class_data;
  const Complex rot = std::exp(Complex(0.0, -(M_PI / 2 + cd.theta_hat)));
  for (int k = 1; k + 1 < static_cast<int>(path.samples.size()); ++k) {
    const Cp1Derivs dd = cp1_derivs_at(path, k, /*force_discrete=*/true);
    const cp1::Samples wv = cp1::metric_density(ref, path.samples[k].v);
    const cp1::Samples bu = cp1::bfield_density(ref, path.samples[k].u);
    const cp1::Samples dud = cp1::deriv(g, dd.ud);
    const cp1::Samples dvd = cp1::deriv(g, dd.vd);
    Cp1Derivs da;
    cp1::Samples duda, dvda;
    if (path.has_analytic_derivatives) {
      da = cp1_derivs_at(path, k);
      duda = cp1::deriv(g, da.ud);
      dvda = cp1::deriv(g, da.vd);
    }
    cp1::Samples v_im(g.M), v_arg(g.M), v_cal(g.M), v_idn(g.M);
    for (int i = 0; i < g.M; ++i) {
      const double half_q = 0.5 * (1.0 - g.x[i] * g.x[i]);
      const double gw = wv[i] * half_q;  // metric coefficient g_{w wbar}
      const Complex mfull = Complex(bu[i], wv[i]) * half_q;
      const Complex dzphi = Complex(dud[i], dvd[i]) * half_q;
      const AnnulusPoint ap =
          annulus_point(Complex(dd.udd[i], dd.vdd[i]), dd.vdd[i], dzphi, dzphi,
                        dvd[i] * half_q, dvd[i] * half_q, gw, mfull);
      v_im[i] = ap.im;
      v_arg[i] = (rot * ap.full).imag();
      v_cal[i] = (rot * ap.full).real();
      if (path.has_analytic_derivatives) {
        const Complex adzphi = Complex(duda[i], dvda[i]) * half_q;
        const AnnulusPoint aa = annulus_point(
            Complex(da.udd[i], da.vdd[i]), da.vdd[i], adzphi, adzphi,
            dvda[i] * half_q, dvda[i] * half_q, gw, mfull);
        v_idn[i] = std::abs(ap.full - aa.full);
      }
    }
    out.res_imaginary.push_back(kernels::sup_abs(v_im.data(), v_im.size()));
    out.res_argument.push_back(kernels::sup_abs(v_arg.data(), v_arg.size()));
    double cal = v_cal[0];
    for (int i = 1; i < g.M; ++i) cal = std::min(cal, v_cal[i]);
    out.calibration_min.push_back(cal);
    if (path.has_analytic_derivatives) {
      out.identity_err.push_back(kernels::sup_abs(v_idn.data(), v_idn.size()));
    }
  }
  return out;
}

std::vector<double> convexity_probe(
    const cp1::Path& path,
    const std::function<double(const cp1::Potential&)>& functional) {
  std::vector<double> values;
  values.reserve(path.samples.size());
  for (const auto& s : path.samples) values.push_back(functional(s));
  return second_differences(path.times, values);
}

std::vector<double> convexity_probe_kenergy(const cp1::Path& path,
                                            const cp1::Cp1Reference& ref) {
  return convexity_probe(path, [&ref](const cp1::Potential& phi) {
    return cp1::complexified_k_energy(ref, phi);
  });
}

double min_kgeod_weight(const cp1::Path& path, const cp1::Cp1Reference& ref) {
  double out = 1e300;
  const cp1::Grid& g = path.grid;
  for (const auto& sample : path.samples) {
    const cp1::Samples wv = cp1::metric_density(ref, sample.v);
    const cp1::Samples bu = cp1::bfield_density(ref, sample.u);
    for (int i = 0; i < g.M; ++i) {
      const double lam = bu[i] / wv[i];
      const double eta = arccot(lam) - ref.class_data.theta_hat;
      out = std::min(out, std::cos(eta) + std::sin(eta) / lam);
    }
  }
  return out;
}

// ---- serialization ---------------------------------------------------------

namespace {
constexpr std::uint32_t kPathMagic = 0x31504b43;  // "CKP1"
}

void write_path_binary(const std::string& path, const TorusPath& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  const TorusGrid& g = p.samples.front().u.grid;
  const std::int32_t header[5] = {static_cast<std::int32_t>(kPathMagic), 1,
                                  g.n, g.m,
                                  static_cast<std::int32_t>(p.samples.size())};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  os.write(reinterpret_cast<const char*>(p.times.data()),
           static_cast<std::streamsize>(p.times.size() * sizeof(double)));
  for (const auto& s : p.samples) {
    os.write(reinterpret_cast<const char*>(s.u.v.data()),
             static_cast<std::streamsize>(s.u.v.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(s.v.v.data()),
             static_cast<std::streamsize>(s.v.v.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + path);
}

TorusPath read_path_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::int32_t header[5];
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!is || header[0] != static_cast<std::int32_t>(kPathMagic) ||
      header[1] != 1) {
    throw IoError("path snapshot: bad header");
  }
  const TorusGrid g(header[2], header[3]);
  TorusPath p;
  p.times.resize(header[4]);
  is.read(reinterpret_cast<char*>(p.times.data()),
          static_cast<std::streamsize>(p.times.size() * sizeof(double)));
  for (int k = 0; k < header[4]; ++k) {
    ComplexPotential s{ScalarField(g), ScalarField(g)};
    is.read(reinterpret_cast<char*>(s.u.v.data()),
            static_cast<std::streamsize>(s.u.v.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(s.v.v.data()),
            static_cast<std::streamsize>(s.v.v.size() * sizeof(double)));
    p.samples.push_back(std::move(s));
  }
  if (!is) throw IoError("read failed: " + path);
  return p;
}

void write_residual_csv(const std::string& path,
                        const std::vector<double>& times,
                        const ResidualPair& res) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os.precision(17);
  os << "t,residual1,residual2\n";
  for (std::size_t k = 0; k < res.first.size(); ++k) {
    os << times[k + 1] << ',' << res.first[k] << ',' << res.second[k] << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace cklab
