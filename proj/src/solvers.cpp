#include "cklab/solvers.hpp"

#include <cmath>
#include <json.hpp>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab {

namespace {

double sup_abs_vec(const std::vector<double>& v) {
  return kernels::sup_abs(v.data(), v.size());
}

}  // namespace

SolverConfig solver_config_from_json(const std::string& text) {
  SolverConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("solver config: ") + e.what());
  }
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("step")) cfg.step = j["step"].get<double>();
  if (j.contains("damping")) cfg.damping = j["damping"].get<double>();
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (cfg.tol <= 0.0 || cfg.damping <= 0.0 || cfg.damping > 1.0) {
    throw ConfigError("solver config: tol > 0 and damping in (0,1] required");
  }
  return cfg;
}

ScalarField phase_field(const ScalarField& u, const FormField& metric,
                        const ClassData& cd) {
  const FormField bu = assemble_form(cd.beta_rep, &u, false);
  const TorusGrid& g = u.grid;
  ScalarField theta(g);
  const std::size_t np = g.points();
  if (g.n == 1) {
    for (std::size_t p = 0; p < np; ++p) {
      theta[p] = arccot(bu.comp[0][p] / metric.comp[0][p]);
    }
    return theta;
  }
  std::vector<double> lo(np), hi(np);
  kernels::active().eig2_pencil(metric.comp[0].data(), metric.comp[1].data(),
                                metric.comp[2].data(), metric.comp[3].data(),
                                bu.comp[0].data(), bu.comp[1].data(),
                                bu.comp[2].data(), bu.comp[3].data(), lo.data(),
                                hi.data(), np);
  for (std::size_t p = 0; p < np; ++p) {
    theta[p] = arccot(lo[p]) + arccot(hi[p]);
  }
  return theta;
}

FlowResult dhym_flow(const ScalarField& initial_u, const FormField& metric,
                     const ClassData& cd, const SolverConfig& cfg) {
  require_positive(metric, "dhym_flow");
  FlowResult out;
  out.u = initial_u;
  make_mean_zero(out.u);
  const double h = out.u.grid.spacing();
  double step = cfg.step > 0.0 ? cfg.step : 0.2 * h * h;

  ScalarField theta = phase_field(out.u, metric, cd);
  auto residual_of = [&](const ScalarField& th) {
    double r = 0.0;
    for (std::size_t p = 0; p < th.size(); ++p) {
      r = std::max(r, std::fabs(th[p] - cd.theta_hat));
    }
    return r;
  };
  for (std::size_t p = 0; p < theta.size(); ++p) {
    if (std::cos(theta[p] - cd.theta_hat) <= 0.0) {
      out.calibration_warning = true;
      break;
    }
  }
  double res = residual_of(theta);
  out.residual_history.push_back(res);
  if (res <= cfg.tol) {
    out.converged = true;
    out.residual = res;
    return out;
  }

  for (int it = 0; it < cfg.max_iters; ++it) {
    ScalarField trial = out.u;
    for (std::size_t p = 0; p < trial.size(); ++p) {
      trial[p] += step * (theta[p] - cd.theta_hat);
    }
    make_mean_zero(trial);
    const ScalarField theta_trial = phase_field(trial, metric, cd);
    const double res_trial = residual_of(theta_trial);
    if (res_trial > res) {
      step *= cfg.damping;
      if (step < 1e-18) break;
      continue;
    }
    out.u = std::move(trial);
    theta = theta_trial;
    res = res_trial;
    out.residual_history.push_back(res);
    step *= 1.1;
    if (res <= cfg.tol) {
      out.converged = true;
      break;
    }
  }
  out.residual = res;
  return out;
}

namespace {

// Elementary CG on mean-zero fields for an SPD operator given as a callback.
template <typename Apply>
bool conjugate_gradient(const Apply& apply, const std::vector<double>& rhs,
                        std::vector<double>& x, double rel_tol, int max_iters) {
  const std::size_t n = rhs.size();
  x.assign(n, 0.0);
  std::vector<double> r = rhs;
  std::vector<double> p = r;
  std::vector<double> ap(n);
  double rr = kernels::dot(r.data(), r.data(), n);
  const double target = rel_tol * rel_tol * rr;
  if (rr == 0.0) return true;
  for (int it = 0; it < max_iters; ++it) {
    apply(p, ap);
    const double pap = kernels::dot(p.data(), ap.data(), n);
    if (pap <= 0.0) return false;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = kernels::dot(r.data(), r.data(), n);
    if (rr_new <= target) return true;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return false;
}

// Gradient of the cofactor-weighted Dirichlet energy: a symmetric positive
// consistent discretization of -2 d(det chi)[i ddbar delta].
ScalarField ma_linear_op(const FormField& chi, const ScalarField& delta) {
  const TorusGrid& g = delta.grid;
  ScalarField out(g);
  if (g.n == 1) {
    // adj = 1: -2 Re dz dzbar = -(1/2) Laplacian.
    const ComplexField db = dzbar(delta, 0);
    const ComplexField dd = dz(db, 0);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = -2.0 * dd.re[p];
    return out;
  }
  const ComplexField d1 = dzbar(delta, 0);
  const ComplexField d2 = dzbar(delta, 1);
  // Y_j = sum_k adj^T_{jk} (dzbar_k delta), adj^T = [[c22, -conj(c12)],
  // [-c12, c11]] with c the chi components.
  ComplexField y1(g), y2(g);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Complex c12(chi.comp[2][p], chi.comp[3][p]);
    const Complex a = d1.at(p);
    const Complex b = d2.at(p);
    const Complex v1 = chi.comp[1][p] * a - std::conj(c12) * b;
    const Complex v2 = -c12 * a + chi.comp[0][p] * b;
    y1.re[p] = v1.real();
    y1.im[p] = v1.imag();
    y2.re[p] = v2.real();
    y2.im[p] = v2.imag();
  }
  const ComplexField w1 = dz(y1, 0);
  const ComplexField w2 = dz(y2, 1);
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = -2.0 * (w1.re[p] + w2.re[p]);
  }
  return out;
}

}  // namespace

MaResult ma_solve_surface(const FormField& omega, const Matrix& chi_class,
                          const SolverConfig& cfg) {
  const TorusGrid& g = omega.grid;
  if (g.n != 2) throw DimensionMismatch("ma_solve_surface: n = 2 only");
  require_positive(omega, "ma_solve_surface");
  const std::vector<double> detw = det_field(omega);
  const double vol_omega = top_integral(g, detw);
  const double vol_chi =
      2.0 * (chi_class(0, 0) * chi_class(1, 1) - chi_class(0, 1) * chi_class(1, 0))
          .real();
  if (std::abs(vol_omega - vol_chi) > 1e-10 * std::abs(vol_omega)) {
    throw VolumeMismatch("ma_solve_surface: int chi^2 != int omega^2");
  }

  MaResult out;
  out.v = ScalarField(g);
  auto log_residual = [&](const FormField& chi, std::vector<double>& f) {
    const std::vector<double> detc = det_field(chi);
    f.resize(detc.size());
    for (std::size_t p = 0; p < detc.size(); ++p) {
      f[p] = std::log(detc[p] / detw[p]);
    }
  };

  FormField chi = assemble_form(chi_class, &out.v, true);
  std::vector<double> f;
  log_residual(chi, f);
  double res = sup_abs_vec(f);
  out.residual_history.push_back(res);

  for (int it = 0; it < cfg.max_iters && res > cfg.tol; ++it) {
    const std::vector<double> detc = det_field(chi);
    std::vector<double> rhs(f.size());
    for (std::size_t p = 0; p < f.size(); ++p) rhs[p] = 2.0 * detc[p] * f[p];
    const double mean =
        kernels::sum(rhs.data(), rhs.size()) / static_cast<double>(rhs.size());
    for (double& x : rhs) x -= mean;

    std::vector<double> delta;
    const bool cg_ok = conjugate_gradient(
        [&](const std::vector<double>& p_in, std::vector<double>& p_out) {
          ScalarField tmp(g);
          tmp.v = p_in;
          p_out = ma_linear_op(chi, tmp).v;
        },
        rhs, delta, 1e-10, 2000);
    if (!cg_ok) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      ScalarField trial = out.v;
      for (std::size_t p = 0; p < trial.size(); ++p) {
        trial[p] += alpha * delta[p];
      }
      make_mean_zero(trial);
      try {
        FormField chi_trial = assemble_form(chi_class, &trial, true);
        std::vector<double> f_trial;
        log_residual(chi_trial, f_trial);
        const double res_trial = sup_abs_vec(f_trial);
        if (res_trial < res) {
          out.v = std::move(trial);
          chi = std::move(chi_trial);
          f = std::move(f_trial);
          res = res_trial;
          accepted = true;
          break;
        }
      } catch (const LostPositivity&) {
        // halve and retry
      }
      alpha *= 0.5;
    }
    out.residual_history.push_back(res);
    if (!accepted) break;
  }
  out.residual = res;
  out.converged = res <= cfg.tol;
  return out;
}

namespace {

// Generic BiCGSTAB for the nonsymmetric geodesic linearization.
template <typename Apply>
bool bicgstab(const Apply& apply, const std::vector<double>& rhs,
              std::vector<double>& x, double rel_tol, int max_iters) {
  const std::size_t n = rhs.size();
  x.assign(n, 0.0);
  std::vector<double> r = rhs;
  std::vector<double> r0 = r;
  std::vector<double> p(n, 0.0), v(n, 0.0), s(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double target = rel_tol * std::sqrt(kernels::dot(r.data(), r.data(), n));
  for (int it = 0; it < max_iters; ++it) {
    const double rho_new = kernels::dot(r0.data(), r.data(), n);
    if (rho_new == 0.0) return false;
    if (it == 0) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = r[i] + beta * (p[i] - omega * v[i]);
      }
    }
    rho = rho_new;
    apply(p, v);
    alpha = rho / kernels::dot(r0.data(), v.data(), n);
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (std::sqrt(kernels::dot(s.data(), s.data(), n)) <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
      return true;
    }
    apply(s, t);
    omega = kernels::dot(t.data(), s.data(), n) /
            kernels::dot(t.data(), t.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    if (std::sqrt(kernels::dot(r.data(), r.data(), n)) <= target) return true;
  }
  return false;
}

}  // namespace

BvpResult geodesic_bvp_epsilon(const ScalarField& v_start,
                               const ScalarField& v_end, const ClassData& cd,
                               int time_samples, const SolverConfig& cfg) {
  const TorusGrid& g = v_start.grid;
  if (g.n != 1) throw DimensionMismatch("geodesic_bvp_epsilon: n = 1 only");
  if (time_samples < 3) throw ConfigError("geodesic_bvp_epsilon: T >= 3");
  if (cfg.epsilon <= 0.0) {
    throw ConfigError("geodesic_bvp_epsilon: epsilon must be positive");
  }
  const int T = time_samples;
  const std::size_t np = g.points();
  const int inner = T - 2;
  const double dt = 1.0 / (T - 1);
  const double eps = cfg.epsilon;
  const double g0 = cd.alpha_rep(0, 0).real();

  std::vector<ScalarField> v(T, ScalarField(g));
  v[0] = v_start;
  v[T - 1] = v_end;

  // Initial guess: linear interpolation plus a concave bump t(1-t) so the
  // lifted form starts positive; grown until it is.
  auto fill_guess = [&](double kap) {
    for (int k = 1; k + 1 < T; ++k) {
      const double t = k * dt;
      for (std::size_t p = 0; p < np; ++p) {
        v[k][p] = (1.0 - t) * v_start[p] + t * v_end[p] + kap * t * (1.0 - t);
      }
    }
  };

  // R_k = vdd g_v - |dz vdot|^2 - eps g0; positivity tracks min(g_v, det/4).
  auto eval_residual = [&](std::vector<std::vector<double>>& res,
                           double& worst_positivity) {
    res.assign(inner, std::vector<double>(np, 0.0));
    worst_positivity = 1e300;
    for (int k = 1; k + 1 < T; ++k) {
      const FormField wv = assemble_form(cd.alpha_rep, &v[k], false);
      ScalarField vdot(g), vdd(g);
      for (std::size_t p = 0; p < np; ++p) {
        vdot[p] = (v[k + 1][p] - v[k - 1][p]) / (2.0 * dt);
        vdd[p] = (v[k + 1][p] - 2.0 * v[k][p] + v[k - 1][p]) / (dt * dt);
      }
      const ComplexField dv = dz(vdot, 0);
      for (std::size_t p = 0; p < np; ++p) {
        const double gv = wv.comp[0][p];
        const double grad2 = dv.re[p] * dv.re[p] + dv.im[p] * dv.im[p];
        const double det4 = vdd[p] * gv - grad2;
        worst_positivity = std::min(worst_positivity, std::min(gv, det4));
        res[k - 1][p] = det4 - eps * g0;
      }
    }
  };

  auto sup_of = [&](const std::vector<std::vector<double>>& res) {
    double s = 0.0;
    for (const auto& slab : res) s = std::max(s, sup_abs_vec(slab));
    return s;
  };

  BvpResult out;
  std::vector<std::vector<double>> res;
  double positivity = -1.0;
  double kappa = std::max(4.0 * eps * g0, 1e-2);
  for (int grow = 0; grow < 60 && positivity <= 0.0; ++grow) {
    fill_guess(kappa);
    eval_residual(res, positivity);
    if (positivity <= 0.0) kappa *= 2.0;
  }
  if (positivity <= 0.0) {
    throw EpsilonTooSmall(
        "geodesic_bvp_epsilon: could not find a positive lifted start");
  }
  double res_sup = sup_of(res);
  out.residual_history.push_back(res_sup);

  // Newton iteration with the nonsymmetric linearization solved by BiCGSTAB.
  auto pack = [&](const std::vector<std::vector<double>>& slabs,
                  std::vector<double>& flat) {
    flat.resize(static_cast<std::size_t>(inner) * np);
    for (int k = 0; k < inner; ++k) {
      std::copy(slabs[k].begin(), slabs[k].end(), flat.begin() + k * np);
    }
  };

  for (int it = 0; it < cfg.max_iters && res_sup > cfg.tol; ++it) {
    // Frozen coefficients of the linearization at the current path.
    std::vector<ScalarField> gv_k, vdd_k;
    std::vector<ComplexField> dv_k;
    for (int k = 1; k + 1 < T; ++k) {
      const FormField wv = assemble_form(cd.alpha_rep, &v[k], false);
      ScalarField gvf(g), vddf(g), vdotf(g);
      for (std::size_t p = 0; p < np; ++p) {
        gvf[p] = wv.comp[0][p];
        vdotf[p] = (v[k + 1][p] - v[k - 1][p]) / (2.0 * dt);
        vddf[p] = (v[k + 1][p] - 2.0 * v[k][p] + v[k - 1][p]) / (dt * dt);
      }
      gv_k.push_back(std::move(gvf));
      vdd_k.push_back(std::move(vddf));
      dv_k.push_back(dz(vdotf, 0));
    }

    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      y.assign(x.size(), 0.0);
      auto slice = [&](int k) -> const double* {
        // k in 0..T-1; boundary slices are zero.
        static thread_local std::vector<double> zero;
        zero.assign(np, 0.0);
        if (k <= 0 || k >= T - 1) return zero.data();
        return x.data() + (k - 1) * np;
      };
      for (int k = 1; k + 1 < T; ++k) {
        const double* xm = slice(k - 1);
        const double* xc = slice(k);
        const double* xp = slice(k + 1);
        ScalarField dcur(g), ddot(g), dddot(g);
        for (std::size_t p = 0; p < np; ++p) {
          dcur[p] = xc[p];
          ddot[p] = (xp[p] - xm[p]) / (2.0 * dt);
          dddot[p] = (xp[p] - 2.0 * xc[p] + xm[p]) / (dt * dt);
        }
        const FormField hess = ddbar(dcur);
        const ComplexField ddelta = dz(ddot, 0);
        double* out_k = y.data() + (k - 1) * np;
        const ScalarField& gvf = gv_k[k - 1];
        const ScalarField& vddf = vdd_k[k - 1];
        const ComplexField& dvf = dv_k[k - 1];
        for (std::size_t p = 0; p < np; ++p) {
          const double cross = 2.0 * (dvf.re[p] * ddelta.re[p] +
                                      dvf.im[p] * ddelta.im[p]);
          out_k[p] = dddot[p] * gvf[p] + vddf[p] * hess.comp[0][p] - cross;
        }
      }
    };

    std::vector<double> rhs;
    pack(res, rhs);
    for (double& r : rhs) r = -r;
    std::vector<double> delta;
    if (!bicgstab(apply, rhs, delta, 1e-10, 4000)) break;

    double alpha = 1.0;
    bool accepted = false;
    std::vector<ScalarField> saved(v.begin() + 1, v.end() - 1);
    for (int ls = 0; ls < 40; ++ls) {
      for (int k = 1; k + 1 < T; ++k) {
        for (std::size_t p = 0; p < np; ++p) {
          v[k][p] = saved[k - 1][p] + alpha * delta[(k - 1) * np + p];
        }
      }
      std::vector<std::vector<double>> res_trial;
      double pos_trial = 0.0;
      eval_residual(res_trial, pos_trial);
      const double sup_trial = sup_of(res_trial);
      if (pos_trial > 0.0 && sup_trial < res_sup) {
        res = std::move(res_trial);
        res_sup = sup_trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      for (int k = 1; k + 1 < T; ++k) v[k] = saved[k - 1];
      break;
    }
    out.residual_history.push_back(res_sup);
  }

  out.residual = res_sup;
  out.converged = res_sup <= cfg.tol;
  out.path.times.resize(T);
  for (int k = 0; k < T; ++k) out.path.times[k] = k * dt;
  for (int k = 0; k < T; ++k) {
    ComplexPotential sample{ScalarField(g), v[k]};
    out.path.samples.push_back(std::move(sample));
  }
  return out;
}

DescentResult kenergy_descent(const ComplexPotential& initial,
                              const ClassData& cd, const SolverConfig& cfg) {
  DescentResult out;
  out.phi = initial;
  make_mean_zero(out.phi.u);
  make_mean_zero(out.phi.v);
  if (calibration_margin(out.phi, cd) <= 0.0) {
    throw Error("kenergy_descent: initial potential is not calibrated");
  }
  const Complex gamma = cd.gamma();
  double energy = complexified_k_energy(out.phi, cd);
  out.energy_history.push_back(energy);
  double step = cfg.step > 0.0 ? cfg.step : 0.25;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const FormField wv = metric_of(out.phi, cd);
    const FormField bu = bfield_of(out.phi, cd);
    const ScalarField s = scalar_curvature(wv);
    const std::vector<double> detv = det_field(wv);
    const std::size_t np = detv.size();

    ScalarField du(out.phi.u.grid), dvdir(out.phi.u.grid);
    double r_phase = 0.0, r_curv = 0.0;
    double margin = 1.0;
    for (std::size_t p = 0; p < np; ++p) {
      Complex mdet;
      if (wv.grid.n == 1) {
        mdet = Complex(bu.comp[0][p], wv.comp[0][p]);
      } else {
        const Complex b12(bu.comp[2][p], bu.comp[3][p]);
        const Complex g12(wv.comp[2][p], wv.comp[3][p]);
        mdet = Complex(bu.comp[0][p], wv.comp[0][p]) *
                   Complex(bu.comp[1][p], wv.comp[1][p]) -
               (b12 + Complex(0, 1) * g12) *
                   (std::conj(b12) + Complex(0, 1) * std::conj(g12));
      }
      const Complex gm = gamma * mdet / detv[p];  // |gamma| r e^{i eta}
      const double mod = std::abs(gm);
      r_phase = std::max(r_phase, std::fabs(gm.imag()));
      r_curv = std::max(r_curv, std::fabs(s[p] - cd.c_gamma - gm.real()));
      margin = std::min(margin, gm.real() / mod);
      du[p] = -gm.imag() / mod;
      dvdir[p] = -(gm.real() - s[p] + cd.c_gamma);
    }
    if (margin <= 0.0) out.calibration_warning = true;
    out.residual_phase = r_phase;
    out.residual_curvature = r_curv;
    if (r_phase <= cfg.tol && r_curv <= cfg.tol) {
      out.converged = true;
      break;
    }
    make_mean_zero(du);
    make_mean_zero(dvdir);

    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      ComplexPotential trial = out.phi;
      for (std::size_t p = 0; p < np; ++p) {
        trial.u[p] += step * du[p];
        trial.v[p] += step * dvdir[p];
      }
      try {
        const double e_trial = complexified_k_energy(trial, cd);
        if (e_trial < energy) {
          out.phi = std::move(trial);
          energy = e_trial;
          accepted = true;
          break;
        }
      } catch (const LostPositivity&) {
        // shrink and retry
      }
      step *= cfg.damping;
      if (step < 1e-16) break;
    }
    if (!accepted) break;
    out.energy_history.push_back(energy);
    step *= 1.2;
  }
  return out;
}

Cp1DescentResult kenergy_descent_cp1(const cp1::Potential& initial,
                                     const cp1::Cp1Reference& ref,
                                     const SolverConfig& cfg) {
  Cp1DescentResult out;
  out.phi = initial;
  const cp1::Grid& g = ref.omega0.grid;
  const ClassData& cd = ref.class_data;
  const Complex gamma = cd.gamma();
  double energy = cp1::complexified_k_energy(ref, out.phi);
  out.energy_history.push_back(energy);
  double step = cfg.step > 0.0 ? cfg.step : 0.25;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const cp1::Samples wv = cp1::metric_density(ref, out.phi.v);
    const cp1::Samples bu = cp1::bfield_density(ref, out.phi.u);
    const cp1::Samples s = cp1::curvature_density(g, wv);

    cp1::Samples du(g.M), dv(g.M);
    double r_phase = 0.0, r_curv = 0.0;
    for (int i = 0; i < g.M; ++i) {
      const Complex gm = gamma * Complex(bu[i], wv[i]) / wv[i];
      const double mod = std::abs(gm);
      r_phase = std::max(r_phase, std::fabs(gm.imag()));
      r_curv = std::max(r_curv, std::fabs(s[i] - cd.c_gamma - gm.real()));
      du[i] = -gm.imag() / mod;
      dv[i] = -(gm.real() - s[i] + cd.c_gamma);
    }
    out.residual_phase = r_phase;
    out.residual_curvature = r_curv;
    if (r_phase <= cfg.tol && r_curv <= cfg.tol) {
      out.converged = true;
      break;
    }
    cp1::mean_zero_shift(g, du);
    cp1::mean_zero_shift(g, dv);

    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      cp1::Potential trial = out.phi;
      for (int i = 0; i < g.M; ++i) {
        trial.u[i] += step * du[i];
        trial.v[i] += step * dv[i];
      }
      try {
        const double e_trial = cp1::complexified_k_energy(ref, trial);
        if (e_trial < energy) {
          out.phi = std::move(trial);
          energy = e_trial;
          accepted = true;
          break;
        }
      } catch (const LostPositivity&) {
        // shrink and retry
      }
      step *= cfg.damping;
      if (step < 1e-16) break;
    }
    if (!accepted) break;
    out.energy_history.push_back(energy);
    step *= 1.2;
  }
  return out;
}

}  // namespace cklab
