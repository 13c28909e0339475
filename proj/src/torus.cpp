#include "cklab/torus.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab {

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Stencil weights at offsets -2..2.
constexpr double kD1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};   // scale 1/(12h)
constexpr double kD2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};  // scale 1/(12h^2)

void apply_stencil_axis(const std::vector<double>& f, std::vector<double>& out,
                        const TorusGrid& g, int axis, const double (&w)[5],
                        double scale) {
  const std::size_t stride = g.stride(axis);
  const std::size_t m = static_cast<std::size_t>(g.m);
  const std::size_t block = stride * m;
  const std::size_t total = g.points();
  std::vector<double> buf(m + 4);
  for (std::size_t base0 = 0; base0 < total; base0 += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      const std::size_t base = base0 + inner;
      for (std::size_t t = 0; t < m; ++t) buf[t + 2] = f[base + t * stride];
      buf[0] = buf[m];
      buf[1] = buf[m + 1];
      buf[m + 2] = buf[2];
      buf[m + 3] = buf[3];
      for (std::size_t t = 0; t < m; ++t) {
        const double* b = buf.data() + t;
        out[base + t * stride] =
            scale * (w[0] * b[0] + w[1] * b[1] + w[2] * b[2] + w[3] * b[3] +
                     w[4] * b[4]);
      }
    }
  }
}

struct Herm2 {
  double a, d;   // diagonal
  Complex b;     // (1,2) entry
};

Herm2 herm_at(const FormField& f, std::size_t p) {
  if (f.grid.n == 1) return {f.comp[0][p], 0.0, 0.0};
  return {f.comp[0][p], f.comp[1][p], Complex(f.comp[2][p], f.comp[3][p])};
}

}  // namespace

TorusGrid::TorusGrid(int n_, int m_) : n(n_), m(m_) {
  if (n < 1 || n > 2) throw DimensionMismatch("TorusGrid: n must be 1 or 2");
  if (m < 8 || (m & (m - 1)) != 0) {
    throw DimensionMismatch("TorusGrid: m must be a power of two >= 8");
  }
}

std::size_t TorusGrid::points() const {
  std::size_t p = 1;
  for (int a = 0; a < axes(); ++a) p *= static_cast<std::size_t>(m);
  return p;
}

std::size_t TorusGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axes() - 1; a > axis; --a) s *= static_cast<std::size_t>(m);
  return s;
}

double TorusGrid::coord(std::size_t p, int axis) const {
  return static_cast<double>((p / stride(axis)) % m) * spacing();
}

FormField::FormField(const TorusGrid& g, bool metric)
    : grid(g), metric_intent(metric) {
  comp.assign(g.n == 1 ? 1 : 4, std::vector<double>(g.points(), 0.0));
}

ScalarField sample_field(const TorusGrid& g,
                         const std::function<double(const double*)>& f) {
  ScalarField out(g);
  double xs[4];
  for (std::size_t p = 0; p < g.points(); ++p) {
    for (int a = 0; a < g.axes(); ++a) xs[a] = g.coord(p, a);
    out[p] = f(xs);
  }
  return out;
}

double field_mean(const ScalarField& f) {
  return kernels::sum(f.v.data(), f.size()) / static_cast<double>(f.size());
}

void make_mean_zero(ScalarField& f) {
  const double mu = field_mean(f);
  for (double& x : f.v) x -= mu;
}

ScalarField d_axis(const ScalarField& f, int axis) {
  ScalarField out(f.grid);
  apply_stencil_axis(f.v, out.v, f.grid, axis, kD1,
                     1.0 / (12.0 * f.grid.spacing()));
  return out;
}

ScalarField d2_axis(const ScalarField& f, int axis) {
  ScalarField out(f.grid);
  const double h = f.grid.spacing();
  apply_stencil_axis(f.v, out.v, f.grid, axis, kD2, 1.0 / (12.0 * h * h));
  return out;
}

ComplexField dz(const ScalarField& f, int j) {
  ComplexField out(f.grid);
  const ScalarField fx = d_axis(f, 2 * j);
  const ScalarField fy = d_axis(f, 2 * j + 1);
  for (std::size_t p = 0; p < f.size(); ++p) {
    out.re[p] = 0.5 * fx[p];
    out.im[p] = -0.5 * fy[p];
  }
  return out;
}

ComplexField dzbar(const ScalarField& f, int j) {
  ComplexField out = dz(f, j);
  for (double& x : out.im.v) x = -x;
  return out;
}

ComplexField dz(const ComplexField& f, int j) {
  const ComplexField a = dz(f.re, j);
  const ComplexField b = dz(f.im, j);
  ComplexField out(f.re.grid);
  for (std::size_t p = 0; p < out.re.size(); ++p) {
    out.re[p] = a.re[p] - b.im[p];
    out.im[p] = a.im[p] + b.re[p];
  }
  return out;
}

ComplexField dzbar(const ComplexField& f, int j) {
  const ComplexField a = dzbar(f.re, j);
  const ComplexField b = dzbar(f.im, j);
  ComplexField out(f.re.grid);
  for (std::size_t p = 0; p < out.re.size(); ++p) {
    out.re[p] = a.re[p] - b.im[p];
    out.im[p] = a.im[p] + b.re[p];
  }
  return out;
}

FormField ddbar(const ScalarField& phi) {
  const TorusGrid& g = phi.grid;
  FormField out(g, false);
  // Diagonal entries: (d^2/dx_j^2 + d^2/dy_j^2)/4 via compact 2nd-derivative
  // stencils; off-diagonal via commuting first-derivative compositions, so
  // the matrix is Hermitian exactly.
  for (int j = 0; j < g.n; ++j) {
    const ScalarField xx = d2_axis(phi, 2 * j);
    const ScalarField yy = d2_axis(phi, 2 * j + 1);
    auto& target = out.comp[j];
    for (std::size_t p = 0; p < phi.size(); ++p) {
      target[p] = 0.25 * (xx[p] + yy[p]);
    }
  }
  if (g.n == 2) {
    const ScalarField x1 = d_axis(phi, 0);
    const ScalarField y1 = d_axis(phi, 1);
    const ScalarField x1x2 = d_axis(x1, 2);
    const ScalarField x1y2 = d_axis(x1, 3);
    const ScalarField y1x2 = d_axis(y1, 2);
    const ScalarField y1y2 = d_axis(y1, 3);
    for (std::size_t p = 0; p < phi.size(); ++p) {
      out.comp[2][p] = 0.25 * (x1x2[p] + y1y2[p]);
      out.comp[3][p] = 0.25 * (x1y2[p] - y1x2[p]);
    }
  }
  return out;
}

FormField assemble_form(const Matrix& class_matrix,
                        const ScalarField* potential, bool metric_intent) {
  if (!potential) throw Error("assemble_form: potential field required");
  const TorusGrid& g = potential->grid;
  if (class_matrix.rows() != g.n) {
    throw DimensionMismatch("assemble_form: class matrix size != grid dim");
  }
  FormField out = ddbar(*potential);
  out.metric_intent = metric_intent;
  const double a11 = class_matrix(0, 0).real();
  for (double& x : out.comp[0]) x += a11;
  if (g.n == 2) {
    const double a22 = class_matrix(1, 1).real();
    const Complex a12 = class_matrix(0, 1);
    for (double& x : out.comp[1]) x += a22;
    for (double& x : out.comp[2]) x += a12.real();
    for (double& x : out.comp[3]) x += a12.imag();
  }
  if (metric_intent) require_positive(out, "assemble_form");
  return out;
}

std::vector<double> det_field(const FormField& f) {
  if (f.grid.n == 1) return f.comp[0];
  std::vector<double> out(f.grid.points());
  kernels::active().det2_herm(f.comp[0].data(), f.comp[1].data(),
                              f.comp[2].data(), f.comp[3].data(), out.data(),
                              out.size());
  return out;
}

void require_positive(const FormField& f, const char* what) {
  const std::vector<double> dets = det_field(f);
  for (std::size_t p = 0; p < dets.size(); ++p) {
    if (f.comp[0][p] <= 0.0 || dets[p] <= 0.0) {
      throw LostPositivity(std::string(what) + ": field lost positivity", p);
    }
  }
}

ScalarField scalar_curvature(const FormField& metric) {
  require_positive(metric, "scalar_curvature");
  const std::vector<double> dets = det_field(metric);
  ScalarField logdet(metric.grid);
  for (std::size_t p = 0; p < dets.size(); ++p) logdet[p] = std::log(dets[p]);
  const FormField hess = ddbar(logdet);
  ScalarField s(metric.grid);
  if (metric.grid.n == 1) {
    for (std::size_t p = 0; p < s.size(); ++p) {
      s[p] = -hess.comp[0][p] / metric.comp[0][p];
    }
    return s;
  }
  for (std::size_t p = 0; p < s.size(); ++p) {
    const Herm2 gm = herm_at(metric, p);
    const Herm2 hm = herm_at(hess, p);
    const double tr = gm.d * hm.a + gm.a * hm.d -
                      2.0 * (gm.b.real() * hm.b.real() + gm.b.imag() * hm.b.imag());
    s[p] = -tr / dets[p];
  }
  return s;
}

FormField ricci_form(const FormField& metric) {
  require_positive(metric, "ricci_form");
  const std::vector<double> dets = det_field(metric);
  ScalarField logdet(metric.grid);
  for (std::size_t p = 0; p < dets.size(); ++p) logdet[p] = std::log(dets[p]);
  FormField ric = ddbar(logdet);
  for (auto& c : ric.comp) {
    for (double& x : c) x = -x;
  }
  return ric;
}

double top_integral(const TorusGrid& g, const std::vector<double>& density) {
  return factorial(g.n) * kernels::sum(density.data(), density.size()) /
         static_cast<double>(g.points());
}

double integrate(const ScalarField& density, const FormField& volume) {
  if (volume.metric_intent) require_positive(volume, "integrate");
  std::vector<double> dens = det_field(volume);
  for (std::size_t p = 0; p < dens.size(); ++p) dens[p] *= density[p];
  return top_integral(density.grid, dens);
}

ScalarField grad_norm_sq(const ScalarField& f, const FormField& metric) {
  const TorusGrid& g = f.grid;
  ScalarField out(g);
  if (g.n == 1) {
    const ComplexField fz = dz(f, 0);
    for (std::size_t p = 0; p < f.size(); ++p) {
      out[p] = (fz.re[p] * fz.re[p] + fz.im[p] * fz.im[p]) / metric.comp[0][p];
    }
    return out;
  }
  const std::vector<double> dets = det_field(metric);
  const ComplexField f1 = dz(f, 0);
  const ComplexField f2 = dz(f, 1);
  for (std::size_t p = 0; p < f.size(); ++p) {
    const Herm2 gm = herm_at(metric, p);
    const Complex a1 = f1.at(p);
    const Complex a2 = f2.at(p);
    // g^{j kbar} f_j conj(f_k) with the inverse of [[a, b], [conj(b), d]].
    const Complex val = gm.d * a1 * std::conj(a1) + gm.a * a2 * std::conj(a2) -
                        gm.b * a2 * std::conj(a1) -
                        std::conj(gm.b) * a1 * std::conj(a2);
    out[p] = val.real() / dets[p];
  }
  return out;
}

ScalarField metric_trace(const FormField& metric, const FormField& chi) {
  ScalarField out(metric.grid);
  if (metric.grid.n == 1) {
    for (std::size_t p = 0; p < out.size(); ++p) {
      out[p] = chi.comp[0][p] / metric.comp[0][p];
    }
    return out;
  }
  const std::vector<double> dets = det_field(metric);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Herm2 gm = herm_at(metric, p);
    const Herm2 xm = herm_at(chi, p);
    const double tr = gm.d * xm.a + gm.a * xm.d -
                      2.0 * (gm.b.real() * xm.b.real() + gm.b.imag() * xm.b.imag());
    out[p] = tr / dets[p];
  }
  return out;
}

namespace {

// Inverse matrix entries [g]^{-1} at a point.
struct Inv2 {
  double a, d;
  Complex b;
};

Inv2 inv_at(const FormField& metric, const std::vector<double>& dets,
            std::size_t p) {
  if (metric.grid.n == 1) return {1.0 / metric.comp[0][p], 0.0, 0.0};
  const Herm2 gm = herm_at(metric, p);
  const double det = dets[p];
  return {gm.d / det, gm.a / det, -gm.b / det};
}

// Z_j = sum_k (g^{-1})_{kj} (dbar u)_k, the (1,0)-gradient components.
std::vector<ComplexField> grad_components(const FormField& metric,
                                          const std::vector<double>& dets,
                                          const ScalarField& u) {
  const TorusGrid& g = u.grid;
  std::vector<ComplexField> z;
  if (g.n == 1) {
    ComplexField ub = dzbar(u, 0);
    for (std::size_t p = 0; p < u.size(); ++p) {
      const Complex v = ub.at(p) / metric.comp[0][p];
      ub.re[p] = v.real();
      ub.im[p] = v.imag();
    }
    z.push_back(std::move(ub));
    return z;
  }
  const ComplexField u1 = dzbar(u, 0);
  const ComplexField u2 = dzbar(u, 1);
  ComplexField z1(g), z2(g);
  for (std::size_t p = 0; p < u.size(); ++p) {
    const Inv2 gi = inv_at(metric, dets, p);
    // [gi] = [[a, b], [conj(b), d]]; Z_j = sum_k gi_{kj} b_k.
    const Complex b1 = u1.at(p);
    const Complex b2 = u2.at(p);
    const Complex zz1 = gi.a * b1 + std::conj(gi.b) * b2;
    const Complex zz2 = gi.b * b1 + gi.d * b2;
    z1.re[p] = zz1.real();
    z1.im[p] = zz1.imag();
    z2.re[p] = zz2.real();
    z2.im[p] = zz2.imag();
  }
  z.push_back(std::move(z1));
  z.push_back(std::move(z2));
  return z;
}

}  // namespace

VectorFieldC gradc(const FormField& metric, const ScalarField& f) {
  const std::vector<double> dets = det_field(metric);
  return {grad_components(metric, dets, f)};
}

ScalarField div_omega(const FormField& metric, const VectorFieldC& w) {
  const TorusGrid& g = metric.grid;
  const std::vector<double> dets = det_field(metric);
  ScalarField out(g);
  for (int j = 0; j < g.n; ++j) {
    ComplexField weighted(g);
    for (std::size_t p = 0; p < out.size(); ++p) {
      weighted.re[p] = dets[p] * w.z[j].re[p];
      weighted.im[p] = dets[p] * w.z[j].im[p];
    }
    const ComplexField der = dz(weighted, j);
    for (std::size_t p = 0; p < out.size(); ++p) {
      out[p] += 2.0 * der.re[p];
    }
  }
  for (std::size_t p = 0; p < out.size(); ++p) out[p] /= dets[p];
  return out;
}

VectorFieldC transfer(const FormField& omega, const FormField& chi,
                      const VectorFieldC& w) {
  const TorusGrid& g = omega.grid;
  const std::vector<double> dets = det_field(omega);
  VectorFieldC out;
  if (g.n == 1) {
    ComplexField t(g);
    for (std::size_t p = 0; p < t.re.size(); ++p) {
      const double factor = chi.comp[0][p] / omega.comp[0][p];
      t.re[p] = factor * w.z[0].re[p];
      t.im[p] = factor * w.z[0].im[p];
    }
    out.z.push_back(std::move(t));
    return out;
  }
  ComplexField t1(g), t2(g);
  for (std::size_t p = 0; p < t1.re.size(); ++p) {
    const Inv2 gi = inv_at(omega, dets, p);
    const Herm2 xm = herm_at(chi, p);
    // [T] = conj([g]^{-1} [chi]) acting on the (1,0)-components; pinned by
    // the identity T(grad_chi v) = grad_omega v.
    const Complex m11 = gi.a * xm.a + gi.b * std::conj(xm.b);
    const Complex m12 = gi.a * xm.b + gi.b * xm.d;
    const Complex m21 = std::conj(gi.b) * xm.a + gi.d * std::conj(xm.b);
    const Complex m22 = std::conj(gi.b) * xm.b + gi.d * xm.d;
    const Complex z1 = w.z[0].at(p);
    const Complex z2 = w.z[1].at(p);
    const Complex o1 = std::conj(m11) * z1 + std::conj(m12) * z2;
    const Complex o2 = std::conj(m21) * z1 + std::conj(m22) * z2;
    t1.re[p] = o1.real();
    t1.im[p] = o1.imag();
    t2.re[p] = o2.real();
    t2.im[p] = o2.imag();
  }
  out.z.push_back(std::move(t1));
  out.z.push_back(std::move(t2));
  return out;
}

ScalarField metric_dual_pairing(const FormField& metric, const ScalarField& f,
                                const ScalarField& h) {
  const TorusGrid& g = metric.grid;
  const std::vector<double> dets = det_field(metric);
  ScalarField out(g);
  std::vector<ComplexField> df, dh;
  for (int j = 0; j < g.n; ++j) {
    df.push_back(dz(f, j));
    dh.push_back(dz(h, j));
  }
  for (std::size_t p = 0; p < out.size(); ++p) {
    const Inv2 gi = inv_at(metric, dets, p);
    Complex acc = 0.0;
    if (g.n == 1) {
      acc = gi.a * df[0].at(p) * std::conj(dh[0].at(p));
    } else {
      const Complex f1 = df[0].at(p), f2 = df[1].at(p);
      const Complex h1 = std::conj(dh[0].at(p)), h2 = std::conj(dh[1].at(p));
      acc = gi.a * f1 * h1 + gi.b * f1 * h2 + std::conj(gi.b) * f2 * h1 +
            gi.d * f2 * h2;
    }
    out[p] = 2.0 * acc.real();
  }
  return out;
}

namespace {

// dbar of the gradient components: A_{j,l} = dzbar_l Z_j.
std::vector<std::vector<ComplexField>> dbar_grad(
    const std::vector<ComplexField>& z, int n) {
  std::vector<std::vector<ComplexField>> a(n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) a[j].push_back(dzbar(z[j], l));
  }
  return a;
}

}  // namespace

double lichnerowicz_seminorm(const ScalarField& u, const FormField& metric) {
  const TorusGrid& g = u.grid;
  const std::vector<double> dets = det_field(metric);
  const auto z = grad_components(metric, dets, u);
  const auto a = dbar_grad(z, g.n);
  std::vector<double> density(g.points());
  for (std::size_t p = 0; p < density.size(); ++p) {
    double norm2 = 0.0;
    if (g.n == 1) {
      // g_{1 1bar} g^{1bar 1} cancel; the norm is plain |A|^2.
      norm2 = std::norm(a[0][0].at(p));
    } else {
      const Herm2 gm = herm_at(metric, p);
      const Inv2 gi = inv_at(metric, dets, p);
      const Complex gmat[2][2] = {{gm.a, gm.b}, {std::conj(gm.b), gm.d}};
      const Complex gim[2][2] = {{gi.a, gi.b}, {std::conj(gi.b), gi.d}};
      Complex acc = 0.0;
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) {
            for (int mi = 0; mi < 2; ++mi) {
              acc += gmat[j][k] * gim[mi][l] * a[j][l].at(p) *
                     std::conj(a[k][mi].at(p));
            }
          }
        }
      }
      norm2 = acc.real();
    }
    density[p] = norm2 * dets[p];
  }
  return top_integral(g, density);
}

double lichnerowicz_pairing(const ScalarField& a, const ScalarField& b,
                            const FormField& metric) {
  const TorusGrid& g = a.grid;
  const std::vector<double> dets = det_field(metric);
  const auto za = grad_components(metric, dets, a);
  const auto zb = grad_components(metric, dets, b);
  const auto aa = dbar_grad(za, g.n);
  const auto ab = dbar_grad(zb, g.n);
  std::vector<double> density(g.points());
  for (std::size_t p = 0; p < density.size(); ++p) {
    Complex acc = 0.0;
    if (g.n == 1) {
      acc = aa[0][0].at(p) * std::conj(ab[0][0].at(p));
    } else {
      const Herm2 gm = herm_at(metric, p);
      const Inv2 gi = inv_at(metric, dets, p);
      const Complex gmat[2][2] = {{gm.a, gm.b}, {std::conj(gm.b), gm.d}};
      const Complex gim[2][2] = {{gi.a, gi.b}, {std::conj(gi.b), gi.d}};
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) {
            for (int mi = 0; mi < 2; ++mi) {
              acc += gmat[j][k] * gim[mi][l] * aa[j][l].at(p) *
                     std::conj(ab[k][mi].at(p));
            }
          }
        }
      }
    }
    density[p] = acc.real() * dets[p];
  }
  return top_integral(g, density);
}

ScalarField vector_pairing(const FormField& metric, const VectorFieldC& z,
                           const VectorFieldC& w) {
  const TorusGrid& g = metric.grid;
  ScalarField out(g);
  for (std::size_t p = 0; p < out.size(); ++p) {
    Complex acc = 0.0;
    if (g.n == 1) {
      acc = metric.comp[0][p] * z.z[0].at(p) * std::conj(w.z[0].at(p));
    } else {
      const Herm2 gm = herm_at(metric, p);
      const Complex z1 = z.z[0].at(p), z2 = z.z[1].at(p);
      const Complex w1 = std::conj(w.z[0].at(p)), w2 = std::conj(w.z[1].at(p));
      acc = gm.a * z1 * w1 + gm.b * z1 * w2 + std::conj(gm.b) * z2 * w1 +
            gm.d * z2 * w2;
    }
    out[p] = 2.0 * acc.real();
  }
  return out;
}

ScalarField lichnerowicz_op(const ScalarField& u, const FormField& metric) {
  const TorusGrid& g = u.grid;
  const int n = g.n;
  const std::vector<double> dets = det_field(metric);
  const auto z = grad_components(metric, dets, u);
  const auto a = dbar_grad(z, n);

  // G_{km} = rho * sum_{jl} [g]_{jk} [gi]_{ml} A_{jl}: the metric pairing of
  // A, so that <A, A'> = sum G_{km} conj(A'_{km}) pointwise.
  std::vector<std::vector<ComplexField>> paired(n);
  for (int k = 0; k < n; ++k) {
    for (int mi = 0; mi < n; ++mi) paired[k].emplace_back(g);
  }
  for (std::size_t p = 0; p < u.size(); ++p) {
    Complex gmat[2][2] = {{0, 0}, {0, 0}};
    Complex gim[2][2] = {{0, 0}, {0, 0}};
    if (n == 1) {
      gmat[0][0] = metric.comp[0][p];
      gim[0][0] = 1.0 / metric.comp[0][p];
    } else {
      const Herm2 gm = herm_at(metric, p);
      const Inv2 gi = inv_at(metric, dets, p);
      gmat[0][0] = gm.a; gmat[0][1] = gm.b;
      gmat[1][0] = std::conj(gm.b); gmat[1][1] = gm.d;
      gim[0][0] = gi.a; gim[0][1] = gi.b;
      gim[1][0] = std::conj(gi.b); gim[1][1] = gi.d;
    }
    for (int k = 0; k < n; ++k) {
      for (int mi = 0; mi < n; ++mi) {
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j) {
          for (int l = 0; l < n; ++l) {
            acc += gmat[j][k] * gim[mi][l] * a[j][l].at(p);
          }
        }
        acc *= dets[p];
        paired[k][mi].re[p] = acc.real();
        paired[k][mi].im[p] = acc.imag();
      }
    }
  }

  // Adjoint chain: (dzbar_l)* = -dz_l, pointwise multipliers conjugated.
  std::vector<ComplexField> y;
  for (int j = 0; j < n; ++j) {
    ComplexField acc(g);
    for (int l = 0; l < n; ++l) {
      const ComplexField d = dz(paired[j][l], l);
      for (std::size_t p = 0; p < u.size(); ++p) {
        acc.re[p] -= d.re[p];
        acc.im[p] -= d.im[p];
      }
    }
    y.push_back(std::move(acc));
  }
  std::vector<ComplexField> c;
  for (int k = 0; k < n; ++k) {
    ComplexField acc(g);
    for (std::size_t p = 0; p < u.size(); ++p) {
      Complex gim[2][2];
      if (n == 1) {
        gim[0][0] = 1.0 / metric.comp[0][p];
      } else {
        const Inv2 gi = inv_at(metric, dets, p);
        gim[0][0] = gi.a; gim[0][1] = gi.b;
        gim[1][0] = std::conj(gi.b); gim[1][1] = gi.d;
      }
      Complex val = 0.0;
      for (int j = 0; j < n; ++j) {
        val += std::conj(gim[k][j]) * y[j].at(p);
      }
      acc.re[p] = val.real();
      acc.im[p] = val.imag();
    }
    c.push_back(std::move(acc));
  }
  ScalarField out(g);
  for (int k = 0; k < n; ++k) {
    const ComplexField d = dz(c[k], k);
    for (std::size_t p = 0; p < u.size(); ++p) out[p] -= d.re[p];
  }
  for (std::size_t p = 0; p < u.size(); ++p) out[p] /= dets[p];
  return out;
}

namespace {

constexpr std::uint32_t kMagic = 0x31464b43;  // "CKF1"

void write_header(std::ofstream& os, std::int32_t kind, const TorusGrid& g,
                  std::int32_t ncomp) {
  os.write(reinterpret_cast<const char*>(&kMagic), 4);
  const std::int32_t vals[3] = {kind, g.n, g.m};
  os.write(reinterpret_cast<const char*>(vals), sizeof(vals));
  os.write(reinterpret_cast<const char*>(&ncomp), 4);
}

void read_header(std::ifstream& is, std::int32_t expected_kind, TorusGrid& g,
                 std::int32_t& ncomp) {
  std::uint32_t magic = 0;
  std::int32_t vals[3] = {0, 0, 0};
  is.read(reinterpret_cast<char*>(&magic), 4);
  is.read(reinterpret_cast<char*>(vals), sizeof(vals));
  is.read(reinterpret_cast<char*>(&ncomp), 4);
  if (!is || magic != kMagic || vals[0] != expected_kind) {
    throw IoError("field snapshot: bad header");
  }
  g = TorusGrid(vals[1], vals[2]);
}

}  // namespace

void write_field_binary(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  write_header(os, 0, f.grid, 1);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!os) throw IoError("write failed: " + path);
}

ScalarField read_scalar_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  TorusGrid g;
  std::int32_t ncomp = 0;
  read_header(is, 0, g, ncomp);
  ScalarField f(g);
  is.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!is) throw IoError("read failed: " + path);
  return f;
}

void write_field_binary(const std::string& path, const FormField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path);
  write_header(os, 1, f.grid, f.ncomp());
  for (const auto& c : f.comp) {
    os.write(reinterpret_cast<const char*>(c.data()),
             static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
  if (!os) throw IoError("write failed: " + path);
}

FormField read_form_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  TorusGrid g;
  std::int32_t ncomp = 0;
  read_header(is, 1, g, ncomp);
  FormField f(g, false);
  if (ncomp != f.ncomp()) throw IoError("field snapshot: component mismatch");
  for (auto& c : f.comp) {
    is.read(reinterpret_cast<char*>(c.data()),
            static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
  if (!is) throw IoError("read failed: " + path);
  return f;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os << "index";
  for (int a = 0; a < f.grid.axes(); ++a) os << ",x" << a;
  os << ",value\n";
  os.precision(17);
  for (std::size_t p = 0; p < f.size(); ++p) {
    os << p;
    for (int a = 0; a < f.grid.axes(); ++a) os << ',' << f.grid.coord(p, a);
    os << ',' << f[p] << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace cklab
