#pragma once

#include <complex>
#include <vector>

#include "cklab/class_algebra.hpp"

namespace cklab::cp1 {

using cklab::Complex;

/// Uniform interior grid on (-1, 1): x_i = -1 + (i+1) h, h = 2/(M+1).
/// Endpoints are excluded; quadrature extrapolates to them, derivatives use
/// one-sided stencils near the boundary.
struct Grid {
  int M = 512;
  double h = 2.0 / 513.0;
  std::vector<double> x;

  Grid() { init(); }
  explicit Grid(int M_) : M(M_), h(2.0 / (M_ + 1)) { init(); }

  bool operator==(const Grid& o) const { return M == o.M; }

 private:
  void init() {
    x.resize(M);
    for (int i = 0; i < M; ++i) x[i] = -1.0 + (i + 1) * h;
  }
};

using Samples = std::vector<double>;

/// S^1-invariant (1,1)-form w(x) dx /\ dtheta on the fixed chart
/// x = tanh(xi); class_scale = integral of w.
struct InvariantForm {
  Grid grid;
  Samples w;
  double class_scale = 2.0;
};

/// Torus-invariant Kaehler metric via its symplectic potential on [-1, 1],
/// stored as the scaled Guillemin reference (class_scale/4) *
/// [(1+y)log(1+y) + (1-y)log(1-y)] plus a smooth correction.
struct MomentumProfile {
  Grid grid;
  Samples correction;  // sampled on grid.x; zero for the round metric
  double class_scale = 2.0;
};

// ---- 1D calculus on the interior grid ------------------------------------

/// 4th-order first/second derivative (central inside, one-sided near ends).
Samples deriv(const Grid& g, const Samples& f);
Samples deriv2(const Grid& g, const Samples& f);

/// Quadrature over [-1, 1] (composite Simpson after cubic endpoint
/// extrapolation).
double quad(const Grid& g, const Samples& f);
Complex quad(const Grid& g, const std::vector<Complex>& f);

/// Cumulative integral F(x_i) = int_{-1}^{x_i} f, 4th order.
Samples cumint(const Grid& g, const Samples& f);

double mean_zero_shift(const Grid& g, Samples& f);  // subtract dx-mean

// ---- invariant geometry in the fixed chart --------------------------------

/// Density increment of i ddbar f: (1/2) d/dx [(1 - x^2) f'].
Samples ddbar_density(const Grid& g, const Samples& f);

/// Scalar curvature of the metric w dx /\ dtheta (trace convention, so the
/// round metric of class scale s has s(x) = 2/s).
Samples curvature_density(const Grid& g, const Samples& w);

/// Pointwise |del f|^2_w = f'^2 (1 - x^2) / (2 w).
Samples grad_norm_sq(const Grid& g, const Samples& f, const Samples& w);

/// Guillemin symplectic potential data for class scale s.
double guillemin_u(double s, double y);
double guillemin_upp(double s, double y);  // second derivative

/// u''(y) samples of a profile (Guillemin part analytic + correction'').
Samples profile_upp(const MomentumProfile& p);

// ---- operations ------------------------------------------------------------

/// Abreu scalar curvature s(y) = -1/2 (1/u'')'' of a momentum profile.
/// Throws LostConvexity when u'' <= 0 somewhere.
Samples abreu_scalar_curvature(const MomentumProfile& p);

/// Exact fiber dHYM solution: density b = cot(theta_hat) w.
/// theta_hat must lie in (0, pi).
InvariantForm dhym_fiber_solution(const InvariantForm& omega,
                                  double theta_hat);

/// Holomorphy potential of the C*-generator scaled by coeff, with respect to
/// the profile metric, in normalized momentum coordinates: coeff * y, made
/// mean-zero. companion_potential solves the B-side kernel equation:
/// derivative coeff * b / w.
Samples holomorphy_potential(const MomentumProfile& p, double coeff);
Samples companion_potential(const Grid& g, const Samples& b, const Samples& w,
                            double coeff);

/// The class-level obstruction evaluated on (coeff times) the C*-generator.
/// Real part: the invariant itself; imaginary part: its value on i times the
/// generator. Vanishes when (omega, bfield) solves the full system and is
/// independent of the chosen representatives.
Complex futaki_invariant(const InvariantForm& omega, const InvariantForm& bfield,
                         const ClassData& cd, double coeff = 1.0);

/// One complexified potential sample on the cp1 backend.
struct Potential {
  Samples u, v;
};

struct Path {
  Grid grid;
  std::vector<double> times;
  std::vector<Potential> samples;
  // Analytic time-derivatives when the construction provides them.
  std::vector<Potential> dot, ddot;
  bool has_analytic_derivatives = false;
};

/// Path generated by the flow of (1/2) grad(v) for the holomorphy pair
/// (u, v) scaled by affine_coeff; requires bfield to solve the fiber
/// equation w.r.t. the start metric (NotDHYMSolution otherwise).
Path trivial_geodesic_path(const MomentumProfile& start,
                           double affine_coeff, const InvariantForm& bfield,
                           const std::vector<double>& times);

/// Independent affine symplectic-potential geodesics in the two classes:
/// the v-path moves the omega-profile by t * coeff_v * y, the u-path moves
/// the bfield profile (class scale k * s) by t * coeff_u * y. Both are exact
/// Kaehler geodesics; the pair is a trivial geodesic only when
/// coeff_u = coeff_v.
Path affine_pair_geodesic(double class_scale, double k_ratio, double coeff_u,
                          double coeff_v, const Grid& g,
                          const std::vector<double>& times);

// ---- functionals on the cp1 backend ---------------------------------------

struct Cp1Reference {
  InvariantForm omega0;
  InvariantForm b0;
  ClassData class_data;
};

/// Builds the round reference metric of class scale s with B = k * omega and
/// the matching class constants (c1 scale = 2).
Cp1Reference make_reference(int M, double class_scale, double k_ratio,
                            double gamma_abs);

double entropy(const Cp1Reference& ref, const Samples& v);
double complexified_k_energy(const Cp1Reference& ref, const Potential& phi);
double first_variation(const Cp1Reference& ref, const Potential& phi,
                       const Potential& dir);

/// Metric / B-field densities of the displaced pair.
Samples metric_density(const Cp1Reference& ref, const Samples& v);
Samples bfield_density(const Cp1Reference& ref, const Samples& u);

/// CSV export of (x, w, b, s, Theta) profiles.
void write_profile_csv(const std::string& path, const Cp1Reference& ref,
                       const Samples& u, const Samples& v);

/// Legendre transform round-trip helpers. to_kahler_potential evaluates
/// F(xi) = y xi - u_true(y) on the chart nodes xi(x) = arctanh(x);
/// from_kahler_potential inverts back to correction samples.
Samples to_kahler_potential(const MomentumProfile& p);
MomentumProfile from_kahler_potential(const Grid& g, const Samples& fvals,
                                      double class_scale);

}  // namespace cklab::cp1
