#include "cklab/class_algebra.hpp"

#include <cmath>

#include "cklab/errors.hpp"

namespace cklab {

Complex mixed_intersection(const std::vector<Matrix>& forms) {
  if (forms.empty()) throw DimensionMismatch("mixed_intersection: empty list");
  const int n = static_cast<int>(forms.size());
  for (const auto& f : forms) {
    if (f.rows() != n || f.cols() != n) {
      throw DimensionMismatch(
          "mixed_intersection: need n forms of size n x n");
    }
  }
  // Polarization of the determinant: the coefficient of t_1...t_n in
  // det(sum t_k A_k), extracted by inclusion-exclusion over subsets.
  Complex total = 0.0;
  const unsigned full = 1u << n;
  for (unsigned mask = 1; mask < full; ++mask) {
    Matrix acc = Matrix::Zero(n, n);
    int bits = 0;
    for (int k = 0; k < n; ++k) {
      if (mask & (1u << k)) {
        acc += forms[k];
        ++bits;
      }
    }
    const double sign = ((n - bits) % 2 == 0) ? 1.0 : -1.0;
    total += sign * acc.determinant();
  }
  return total;
}

ClassData class_constants(const Matrix& alpha_rep, const Matrix& beta_rep,
                          double gamma_abs, const Matrix* c1_rep,
                          std::optional<double> theta_hat_override) {
  const int n = static_cast<int>(alpha_rep.rows());
  if (beta_rep.rows() != n || beta_rep.cols() != n || alpha_rep.cols() != n) {
    throw DimensionMismatch("class_constants: representative size mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(alpha_rep, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) <= 1e-12 * eig.eigenvalues()(n - 1)) {
    throw NonPositiveMetric("class_constants: alpha is not Kaehler");
  }

  ClassData cd;
  cd.dim = n;
  cd.alpha_rep = alpha_rep;
  cd.beta_rep = beta_rep;
  cd.gamma_abs = gamma_abs;

  const Matrix compl_rep = beta_rep + Complex(0, 1) * alpha_rep;
  cd.alpha_volume =
      mixed_intersection(std::vector<Matrix>(n, alpha_rep)).real();
  const Complex compl_volume =
      mixed_intersection(std::vector<Matrix>(n, compl_rep));
  if (std::abs(compl_volume) <= 1e-12 * cd.alpha_volume) {
    throw VanishingComplexifiedVolume(
        "class_constants: (beta + i alpha)^n vanishes");
  }
  cd.volume_ratio = compl_volume / cd.alpha_volume;

  double lift = std::arg(cd.volume_ratio);
  if (lift <= 0.0) lift += 2.0 * M_PI;  // principal lift in (0, 2 pi]
  if (theta_hat_override) {
    const double t = *theta_hat_override;
    if (t <= 0.0 || t >= n * M_PI) {
      throw ConfigError("theta_hat override must lie in (0, n pi)");
    }
    const double k = (t - lift) / (2.0 * M_PI);
    if (std::abs(k - std::round(k)) > 1e-9) {
      throw ConfigError(
          "theta_hat override is not congruent mod 2 pi to the class angle");
    }
    lift = t;
  }
  cd.theta_hat = lift;

  double chern_slope = 0.0;
  if (c1_rep) {
    std::vector<Matrix> forms(n, alpha_rep);
    forms[0] = *c1_rep;
    chern_slope = n * mixed_intersection(forms).real() / cd.alpha_volume;
  }
  cd.c_gamma = chern_slope - gamma_abs * std::abs(cd.volume_ratio);
  return cd;
}

StabilityCheck stability_check_top(const ClassData& cd,
                                   const Matrix& chi_rep) {
  const int n = cd.dim;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(chi_rep, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) <= 0.0) {
    throw NonPositiveChi("stability_check_top: chi is not Kaehler");
  }
  const Matrix compl_rep = cd.beta_rep + Complex(0, 1) * cd.alpha_rep;
  const Complex phase = std::exp(Complex(0.0, -cd.theta_hat));

  StabilityCheck out;
  out.pass = true;
  for (int p = 1; p <= n; ++p) {
    std::vector<Matrix> forms;
    forms.insert(forms.end(), p, compl_rep);
    forms.insert(forms.end(), n - p, chi_rep);
    const double val = (phase * mixed_intersection(forms)).imag();
    out.inequalities.push_back(val);
    if (val > 1e-10) out.pass = false;
  }
  return out;
}

}  // namespace cklab
