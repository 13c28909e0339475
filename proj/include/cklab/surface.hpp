#pragma once

#include "cklab/functionals.hpp"

namespace cklab {

/// State of the surface-case system on the flat 2-torus: a pair of Kaehler
/// potentials, u displacing omega in alpha and v displacing chi in the
/// auxiliary Kaehler class, with the class volumes matched.
struct SurfacePair {
  ScalarField u;
  ScalarField v;
  Matrix omega_class;
  Matrix chi_class;
  double gamma_tilde = 1.0;
};

/// Validates Hermiticity, positivity and the class condition
/// int chi^2 = int omega^2 (to 1e-12 relative).
SurfacePair make_surface_pair(ScalarField u, ScalarField v, Matrix omega_class,
                              Matrix chi_class, double gamma_tilde);

FormField omega_of(const SurfacePair& sp);
FormField chi_of(const SurfacePair& sp);

/// Pointwise sin(theta_hat) B - cos(theta_hat) omega.
FormField chi_change_of_variables(const FormField& bfield,
                                  const FormField& metric, double theta_hat);

/// The constant in the twisted curvature equation, from the defining
/// integral identity at the reference pair.
double surface_constant(const SurfacePair& sp);

/// The surface energy: entropy + c/3 energy - gamma_tilde group.
double m_prime(const SurfacePair& sp);

/// F_mu for a fixed volume density mu (stored as a det-valued density, so
/// that its total mass is top_integral(mu)); must match alpha^2.
double f_mu(const SurfacePair& sp, const std::vector<double>& mu);
std::vector<double> default_mu(const SurfacePair& sp);

/// The Hessian operator: Q(a, b) with a in the omega direction and b in the
/// chi direction. Self-adjoint for the L^2(omega^2) pairing by construction.
struct QResult {
  ScalarField first;
  ScalarField second;
};

QResult hessian_q_apply(const SurfacePair& sp, const ScalarField& a,
                        const ScalarField& b);

/// <(a,b), (c,d)>_{L^2(omega^2)}.
double l2_pairing(const SurfacePair& sp, const ScalarField& a,
                  const ScalarField& b, const ScalarField& c,
                  const ScalarField& d);

/// The symmetric display of the Hessian bilinear form (the dual route to
/// <Q(a,b),(c,d)>): Lichnerowicz pairing plus the gradient-difference square.
double hessian_symmetric_form(const SurfacePair& sp, const ScalarField& a,
                              const ScalarField& b, const ScalarField& c,
                              const ScalarField& d);

}  // namespace cklab
