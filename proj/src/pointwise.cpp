#include "cklab/pointwise.hpp"

#include <algorithm>
#include <cmath>

#include "cklab/errors.hpp"

namespace cklab {

namespace {

void check_hermitian(const Matrix& a, const char* name) {
  const double scale = std::max(1.0, a.norm());
  if ((a - a.adjoint()).norm() > 1e-12 * scale) {
    throw Error(std::string(name) + " is not Hermitian");
  }
}

}  // namespace

HermitianPair::HermitianPair(Matrix omega_in, Matrix bfield_in)
    : dim(static_cast<int>(omega_in.rows())),
      omega(std::move(omega_in)),
      bfield(std::move(bfield_in)) {
  if (omega.rows() != omega.cols() || bfield.rows() != bfield.cols() ||
      bfield.rows() != omega.rows()) {
    throw DimensionMismatch("HermitianPair: omega and bfield must be square of equal size");
  }
  check_hermitian(omega, "omega");
  check_hermitian(bfield, "bfield");
}

double arccot(double x) { return M_PI / 2 - std::atan(x); }

Spectrum relative_eigenvalues(const HermitianPair& pair) {
  Eigen::SelfAdjointEigenSolver<Matrix> omega_eig(pair.omega,
                                                  Eigen::EigenvaluesOnly);
  const auto& mu = omega_eig.eigenvalues();
  if (mu(0) <= 1e-12 * mu(pair.dim - 1)) {
    throw NonPositiveMetric("omega is not positive-definite");
  }
  // Cholesky reduction of the definite pencil to a standard Hermitian problem.
  Eigen::LLT<Matrix> llt(pair.omega);
  Matrix l = llt.matrixL();
  Matrix reduced = l.triangularView<Eigen::Lower>().solve(pair.bfield);
  reduced = l.triangularView<Eigen::Lower>()
                .solve(reduced.adjoint().eval())
                .adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.adjoint()),
                                            Eigen::EigenvaluesOnly);
  Spectrum out;
  out.lambdas.assign(eig.eigenvalues().data(),
                     eig.eigenvalues().data() + pair.dim);
  std::sort(out.lambdas.begin(), out.lambdas.end());
  return out;
}

double lagrangian_phase(const Spectrum& spec) {
  double theta = 0.0;
  for (double lam : spec.lambdas) theta += arccot(lam);
  return theta;
}

double lagrangian_radius(const Spectrum& spec) {
  double r = 1.0;
  for (double lam : spec.lambdas) r *= std::sqrt(1.0 + lam * lam);
  return r;
}

PhaseRadius phase_radius(const HermitianPair& pair) {
  const Spectrum spec = relative_eigenvalues(pair);
  return {lagrangian_phase(spec), lagrangian_radius(spec)};
}

Complex complexified_volume_ratio(const HermitianPair& pair) {
  Eigen::SelfAdjointEigenSolver<Matrix> omega_eig(pair.omega,
                                                  Eigen::EigenvaluesOnly);
  const auto& mu = omega_eig.eigenvalues();
  if (mu(0) <= 1e-12 * mu(pair.dim - 1)) {
    throw NonPositiveMetric("omega is not positive-definite");
  }
  const Matrix num = pair.bfield + Complex(0, 1) * pair.omega;
  return num.determinant() / pair.omega.determinant();
}

bool is_almost_calibrated(const HermitianPair& pair, double theta_hat) {
  return std::cos(phase_radius(pair).theta - theta_hat) > 0.0;
}

ConvexitySummands convexity_summands(double lambda, double eta, Complex u,
                                     Complex v) {
  ConvexitySummands out{};
  const double r2 = 1.0 + lambda * lambda;
  const double r = std::sqrt(r2);
  const double theta = arccot(lambda);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  const double uu = std::norm(u);
  const double vv = std::norm(v);
  const double cross = 2.0 * (u * std::conj(v)).real();  // u vbar + ubar v

  // Trigonometric display with theta_a = arccot(lambda).
  out.critical = vv + (uu - vv) / r * st - cross / r * ct;

  // Geodesic-convexity summand: the eta-dependent display, left divided by
  // cos(eta) as it appears under the integral.
  const double se = std::sin(eta);
  const double ce = std::cos(eta);
  const double q = (uu - vv) / r2;
  const double w = cross / r2;
  const double bracket = vv * se * se + q * (lambda * ce * se + se * se) -
                         w * (lambda * se * se - ce * se) + vv * ce * ce -
                         q * (lambda * ce * se - ce * ce) -
                         w * (lambda * ce * ce + ce * se);
  out.geodesic = bracket / ce;

  if (lambda == 0.0) {
    throw DivisionByZero("kgeod_weight undefined for lambda = 0");
  }
  out.kgeod_weight = ce + se / lambda;

  // The closed algebraic square both displays reduce to.
  out.square_form = std::norm(lambda * v - u) / r2;
  return out;
}

}  // namespace cklab
