#pragma once

#include <optional>
#include <vector>

#include "cklab/pointwise.hpp"

namespace cklab {

/// Cohomology-level constants of a complexified class beta + i alpha, built
/// from constant-coefficient representatives. All intersection numbers use
/// the normalization in which the n-fold product of the form with identity
/// matrix equals n!.
struct ClassData {
  int dim = 0;
  Matrix alpha_rep;    // Hermitian positive
  Matrix beta_rep;     // Hermitian
  double gamma_abs = 1.0;
  double theta_hat = 0.0;  // lift of arg((beta+i alpha)^n / alpha^n)
  double c_gamma = 0.0;

  // Cached intersection data.
  Complex volume_ratio;      // (beta+i alpha)^n / alpha^n
  double alpha_volume = 0.0; // alpha^n

  Complex gamma() const {
    return gamma_abs * std::exp(Complex(0.0, -theta_hat));
  }
};

/// Intersection number of n constant forms on the unit-volume torus,
/// normalized so that the n-fold self-intersection of the identity form is
/// n!. Entries may be complex combinations such as beta + i alpha.
Complex mixed_intersection(const std::vector<Matrix>& forms);

/// Derives theta_hat and c_gamma from the class representatives. theta_hat is
/// the principal lift in (0, 2 pi] of arg((beta+i alpha)^n / alpha^n) unless
/// overridden; an override must be congruent mod 2 pi and lie in (0, n pi).
/// c1_rep is the constant representative of the first Chern class (zero on
/// torus backends when omitted).
ClassData class_constants(const Matrix& alpha_rep, const Matrix& beta_rep,
                          double gamma_abs, const Matrix* c1_rep = nullptr,
                          std::optional<double> theta_hat_override = {});

/// The top-dimension slope inequalities Im(e^{-i theta_hat}
/// (alpha^C)^p . chi^{n-p}) <= 0 for p = 1..n against a Kaehler class chi.
/// Subvariety conditions are not checked.
struct StabilityCheck {
  std::vector<double> inequalities;  // the imaginary parts, p = 1..n
  bool pass = false;                 // all <= 1e-10
};

StabilityCheck stability_check_top(const ClassData& cd, const Matrix& chi_rep);

}  // namespace cklab
