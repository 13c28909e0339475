#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cklab/pointwise.hpp"

namespace cklab {

/// Uniform periodic grid on the flat torus C^n / (Z + iZ)^n, n = 1 or 2.
/// Real axes are ordered (x1, y1[, x2, y2]) with z_j = x_j + i y_j; storage is
/// row-major with axis 0 slowest.
struct TorusGrid {
  int n = 1;
  int m = 32;

  TorusGrid() = default;
  TorusGrid(int n_, int m_);

  int axes() const { return 2 * n; }
  std::size_t points() const;
  double spacing() const { return 1.0 / m; }
  std::size_t stride(int axis) const;
  double coord(std::size_t p, int axis) const;

  bool operator==(const TorusGrid&) const = default;
};

struct ScalarField {
  TorusGrid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), v(g.points(), fill) {}

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

struct ComplexField {
  ScalarField re, im;

  ComplexField() = default;
  explicit ComplexField(const TorusGrid& g) : re(g), im(g) {}
  Complex at(std::size_t i) const { return {re[i], im[i]}; }
};

/// Hermitian-matrix-valued field: the coefficient field of a real (1,1)-form.
/// Components: n=1 {h11}; n=2 {h11, h22, Re h12, Im h12}.
struct FormField {
  TorusGrid grid;
  bool metric_intent = false;
  std::vector<std::vector<double>> comp;

  FormField() = default;
  FormField(const TorusGrid& g, bool metric);

  int ncomp() const { return static_cast<int>(comp.size()); }
};

/// n components of a real vector field, stored as the (1,0)-parts Z^j.
struct VectorFieldC {
  std::vector<ComplexField> z;
};

ScalarField sample_field(const TorusGrid& g,
                         const std::function<double(const double*)>& f);
double field_mean(const ScalarField& f);
void make_mean_zero(ScalarField& f);

/// 4th-order periodic central differences along one real axis.
ScalarField d_axis(const ScalarField& f, int axis);
ScalarField d2_axis(const ScalarField& f, int axis);

/// dz_j = (d/dx_j - i d/dy_j)/2 and its conjugate.
ComplexField dz(const ScalarField& f, int j);
ComplexField dzbar(const ScalarField& f, int j);
ComplexField dz(const ComplexField& f, int j);
ComplexField dzbar(const ComplexField& f, int j);

/// Complex Hessian coefficient field of phi; Hermitian by construction.
FormField ddbar(const ScalarField& phi);

/// class_matrix + ddbar(potential); checks pointwise positive-definiteness
/// when metric_intent is set (throws LostPositivity with the grid index).
FormField assemble_form(const Matrix& class_matrix, const ScalarField* potential,
                        bool metric_intent);

std::vector<double> det_field(const FormField& f);
void require_positive(const FormField& f, const char* what);

/// Scalar curvature s = -trace(g^{-1} ddbar(log det g)) of a Kaehler metric
/// field; identically 0 for constant (flat) fields.
ScalarField scalar_curvature(const FormField& metric);

/// Ricci coefficient field -ddbar(log det g).
FormField ricci_form(const FormField& metric);

/// Integral of a top-form given by its pointwise density in dV units
/// (the density of omega^n is n! det g). Pairwise-summed, deterministic.
double top_integral(const TorusGrid& g, const std::vector<double>& density);

/// Quadrature of density * volume^n.
double integrate(const ScalarField& density, const FormField& volume);

/// Pointwise |del f|^2_g = g^{j kbar} f_j f_kbar for real f.
ScalarField grad_norm_sq(const ScalarField& f, const FormField& metric);

/// Pointwise trace_g(chi) = Lambda_omega chi.
ScalarField metric_trace(const FormField& metric, const FormField& chi);

/// || dbar grad^{1,0} u ||^2_{L^2(omega)}.
double lichnerowicz_seminorm(const ScalarField& u, const FormField& metric);

/// The Lichnerowicz operator D*D u, the exact discrete adjoint composition,
/// so that <D*D u, w>_{L^2(omega)} == the seminorm pairing for all w.
ScalarField lichnerowicz_op(const ScalarField& u, const FormField& metric);

/// Polarized seminorm: Re < dbar grad a, dbar grad b >_{L^2(omega)}.
double lichnerowicz_pairing(const ScalarField& a, const ScalarField& b,
                            const FormField& metric);

/// Gradient vector field of f w.r.t. the metric, as (1,0)-components.
VectorFieldC gradc(const FormField& metric, const ScalarField& f);

/// Riemannian divergence w.r.t. the metric volume: (1/rho) d(rho W).
/// Exact negative adjoint of df(W) under the omega^n quadrature.
ScalarField div_omega(const FormField& metric, const VectorFieldC& w);

/// Transfer endomorphism omega^{-1} chi applied to a vector field.
VectorFieldC transfer(const FormField& omega, const FormField& chi,
                      const VectorFieldC& w);

/// Riemannian dual pairing g_omega(df, dh) = 2 Re g^{j kbar} f_j h_kbar.
ScalarField metric_dual_pairing(const FormField& metric, const ScalarField& f,
                                const ScalarField& h);

/// Riemannian pairing of two vector fields: 2 Re g_{j kbar} Z^j conj(W^k).
ScalarField vector_pairing(const FormField& metric, const VectorFieldC& z,
                           const VectorFieldC& w);

// Flat binary field snapshots (header: magic, kind, n, m, ncomp; row-major
// payload) and CSV export for plots.
void write_field_binary(const std::string& path, const ScalarField& f);
ScalarField read_scalar_binary(const std::string& path);
void write_field_binary(const std::string& path, const FormField& f);
FormField read_form_binary(const std::string& path);
void write_field_csv(const std::string& path, const ScalarField& f);

}  // namespace cklab
