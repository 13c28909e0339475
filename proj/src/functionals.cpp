#include "cklab/functionals.hpp"

#include <cmath>
#include <fstream>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab {

namespace {

struct CMat2 {
  Complex m11, m22, m12, m21;
};

Complex cdet(const CMat2& m) { return m.m11 * m.m22 - m.m12 * m.m21; }

// Polarized determinant: cmix(M, M) = cdet(M).
Complex cmix(const CMat2& a, const CMat2& b) {
  return 0.5 * (a.m11 * b.m22 + b.m11 * a.m22 - a.m12 * b.m21 - b.m12 * a.m21);
}

// The n = 1 embeddings use m22 = 1 so cdet degenerates to the entry itself.
CMat2 real_at(const FormField& f, std::size_t p) {
  if (f.grid.n == 1) return {f.comp[0][p], 1.0, 0.0, 0.0};
  const Complex off(f.comp[2][p], f.comp[3][p]);
  return {f.comp[0][p], f.comp[1][p], off, std::conj(off)};
}

// B + iG from two Hermitian component fields.
CMat2 compl_at(const FormField& bf, const FormField& gf, std::size_t p) {
  if (bf.grid.n == 1) {
    return {Complex(bf.comp[0][p], gf.comp[0][p]), 1.0, 0.0, 0.0};
  }
  const Complex b12(bf.comp[2][p], bf.comp[3][p]);
  const Complex g12(gf.comp[2][p], gf.comp[3][p]);
  return {Complex(bf.comp[0][p], gf.comp[0][p]),
          Complex(bf.comp[1][p], gf.comp[1][p]),
          b12 + Complex(0, 1) * g12,
          std::conj(b12) + Complex(0, 1) * std::conj(g12)};
}

CMat2 const_mat(const Matrix& m, int n) {
  if (n == 1) return {m(0, 0), 1.0, 0.0, 0.0};
  return {m(0, 0), m(1, 1), m(0, 1), m(1, 0)};
}

}  // namespace

ComplexPotential make_potential(ScalarField u, ScalarField v) {
  if (!(u.grid == v.grid)) {
    throw DimensionMismatch("make_potential: grids differ");
  }
  make_mean_zero(u);
  make_mean_zero(v);
  return {std::move(u), std::move(v)};
}

FormField metric_of(const ComplexPotential& phi, const ClassData& cd) {
  return assemble_form(cd.alpha_rep, &phi.v, true);
}

FormField bfield_of(const ComplexPotential& phi, const ClassData& cd) {
  return assemble_form(cd.beta_rep, &phi.u, false);
}

double calibration_margin(const ComplexPotential& phi, const ClassData& cd) {
  const FormField g = metric_of(phi, cd);
  const FormField b = bfield_of(phi, cd);
  const std::size_t np = g.grid.points();
  const int n = g.grid.n;
  double margin = 1.0;
  std::vector<double> lo(np), hi(np);
  if (n == 1) {
    for (std::size_t p = 0; p < np; ++p) lo[p] = b.comp[0][p] / g.comp[0][p];
    for (std::size_t p = 0; p < np; ++p) {
      margin = std::min(margin, std::cos(arccot(lo[p]) - cd.theta_hat));
    }
    return margin;
  }
  kernels::active().eig2_pencil(g.comp[0].data(), g.comp[1].data(),
                                g.comp[2].data(), g.comp[3].data(),
                                b.comp[0].data(), b.comp[1].data(),
                                b.comp[2].data(), b.comp[3].data(), lo.data(),
                                hi.data(), np);
  for (std::size_t p = 0; p < np; ++p) {
    const double theta = arccot(lo[p]) + arccot(hi[p]);
    margin = std::min(margin, std::cos(theta - cd.theta_hat));
  }
  return margin;
}

double entropy(const ScalarField& v, const Matrix& omega0_rep) {
  const FormField wv = assemble_form(omega0_rep, &v, true);
  const std::vector<double> dv = det_field(wv);
  const double d0 = (v.grid.n == 1)
                        ? omega0_rep(0, 0).real()
                        : const_mat(omega0_rep, 2).m11.real() *
                                  const_mat(omega0_rep, 2).m22.real() -
                              std::norm(omega0_rep(0, 1));
  std::vector<double> dens(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    dens[p] = std::log(dv[p] / d0) * dv[p];
  }
  return top_integral(v.grid, dens);
}

double energy_family(const ScalarField& v, const Matrix& omega0_rep,
                     const FormField* twist) {
  const int n = v.grid.n;
  const FormField wv = assemble_form(omega0_rep, &v, true);
  const CMat2 c0 = const_mat(omega0_rep, n);
  std::vector<double> dens(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const CMat2 cv = real_at(wv, p);
    Complex acc = 0.0;
    if (!twist) {
      acc = (n == 1) ? c0.m11 + cv.m11
                     : cdet(c0) + cmix(c0, cv) + cdet(cv);
    } else {
      const CMat2 eta = real_at(*twist, p);
      acc = (n == 1) ? eta.m11 : cmix(eta, c0) + cmix(eta, cv);
    }
    dens[p] = v[p] * acc.real();
  }
  return top_integral(v.grid, dens);
}

Complex complexified_energy(const ComplexPotential& phi, const ClassData& cd) {
  const int n = phi.u.grid.n;
  const FormField bu = bfield_of(phi, cd);
  const FormField wv = metric_of(phi, cd);
  const CMat2 m0 = const_mat(
      (cd.beta_rep + Complex(0, 1) * cd.alpha_rep).eval(), n);
  std::vector<double> dre(phi.u.size()), dim(phi.u.size());
  for (std::size_t p = 0; p < phi.u.size(); ++p) {
    const CMat2 mp = compl_at(bu, wv, p);
    const Complex acc = (n == 1) ? m0.m11 + mp.m11
                                 : cdet(m0) + cmix(m0, mp) + cdet(mp);
    const Complex val = Complex(phi.u[p], phi.v[p]) * acc;
    dre[p] = val.real();
    dim[p] = val.imag();
  }
  return {top_integral(phi.u.grid, dre), top_integral(phi.u.grid, dim)};
}

double complexified_k_energy(const ComplexPotential& phi, const ClassData& cd) {
  const int n = phi.u.grid.n;
  const double h = entropy(phi.v, cd.alpha_rep);
  const double e = energy_family(phi.v, cd.alpha_rep);
  const Complex ec = complexified_energy(phi, cd);
  // Flat torus reference: Ric(omega0) = 0, the twisted term drops.
  return h + cd.c_gamma / (n + 1) * e + (cd.gamma() * ec).imag() / (n + 1);
}

double first_variation(const ComplexPotential& phi, const ComplexPotential& dir,
                       const ClassData& cd) {
  const FormField wv = metric_of(phi, cd);
  const FormField bu = bfield_of(phi, cd);
  const ScalarField s = scalar_curvature(wv);
  const std::vector<double> detv = det_field(wv);
  const Complex gamma = cd.gamma();
  std::vector<double> dens(phi.u.size());
  for (std::size_t p = 0; p < phi.u.size(); ++p) {
    const Complex mdet = cdet(compl_at(bu, wv, p));
    const Complex val = Complex(dir.u[p], dir.v[p]) *
                        (gamma * mdet - (s[p] - cd.c_gamma) * detv[p]);
    dens[p] = val.imag();
  }
  return top_integral(phi.u.grid, dens);
}

CalabiValue complexified_calabi(const ComplexPotential& phi,
                                const ClassData& cd) {
  const FormField wv = metric_of(phi, cd);
  const FormField bu = bfield_of(phi, cd);
  const ScalarField s = scalar_curvature(wv);
  const std::vector<double> detv = det_field(wv);
  const Complex gamma = cd.gamma();
  std::vector<double> d_value(phi.u.size()), d_dev(phi.u.size()),
      d_vol(phi.u.size());
  for (std::size_t p = 0; p < phi.u.size(); ++p) {
    const Complex mdet = cdet(compl_at(bu, wv, p));
    const Complex scb = s[p] - gamma * mdet / detv[p];
    d_value[p] = std::norm(scb) * detv[p];
    d_dev[p] = std::norm(scb - cd.c_gamma) * detv[p];
    d_vol[p] = detv[p];
  }
  CalabiValue out;
  out.value = top_integral(phi.u.grid, d_value);
  out.deviation = top_integral(phi.u.grid, d_dev);
  out.floor = cd.c_gamma * cd.c_gamma * top_integral(phi.u.grid, d_vol);
  return out;
}

double volume_functional(const ScalarField& u, const FormField& metric,
                         const ClassData& cd) {
  require_positive(metric, "volume_functional");
  const FormField bu = assemble_form(cd.beta_rep, &u, false);
  std::vector<double> dens(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    dens[p] = std::abs(cdet(compl_at(bu, metric, p)));
  }
  return top_integral(u.grid, dens);
}

void batch_evaluate_csv(const std::string& path,
                        const std::vector<ComplexPotential>& phis,
                        const ClassData& cd) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os.precision(17);
  os << "index,entropy,energy,kenergy,calabi,volume\n";
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto& phi = phis[i];
    const FormField wv = metric_of(phi, cd);
    os << i << ',' << entropy(phi.v, cd.alpha_rep) << ','
       << energy_family(phi.v, cd.alpha_rep) << ','
       << complexified_k_energy(phi, cd) << ','
       << complexified_calabi(phi, cd).value << ','
       << volume_functional(phi.u, wv, cd) << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace cklab
