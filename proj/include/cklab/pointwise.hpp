#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cklab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// A pointwise pair (omega, B) of n x n Hermitian matrices, omega
/// positive-definite. Carries the relative-eigenvalue data of the
/// endomorphism omega^{-1} B.
struct HermitianPair {
  int dim = 0;
  Matrix omega;
  Matrix bfield;

  HermitianPair() = default;
  HermitianPair(Matrix omega_in, Matrix bfield_in);
};

/// Real eigenvalues of the Hermitian-definite pencil det(B - lambda omega),
/// sorted ascending.
struct Spectrum {
  std::vector<double> lambdas;
};

struct PhaseRadius {
  double theta;   // in (0, n*pi)
  double radius;  // >= 1
};

/// Inverse cotangent with range (0, pi): arccot(x) = pi/2 - arctan(x).
double arccot(double x);

/// Solves det(B - lambda omega) = 0 via Cholesky reduction to a standard
/// Hermitian eigenproblem. Throws NonPositiveMetric when the smallest
/// eigenvalue of omega is <= 1e-12 times the largest.
Spectrum relative_eigenvalues(const HermitianPair& pair);

/// Theta = sum_a arccot(lambda_a), in (0, n*pi).
double lagrangian_phase(const Spectrum& spec);

/// r = prod_a (1 + lambda_a^2)^{1/2} >= 1.
double lagrangian_radius(const Spectrum& spec);

PhaseRadius phase_radius(const HermitianPair& pair);

/// det(B + i omega) / det(omega); equals radius * e^{i Theta} mod 2 pi.
Complex complexified_volume_ratio(const HermitianPair& pair);

/// cos(Theta(pair) - theta_hat) > 0.
bool is_almost_calibrated(const HermitianPair& pair, double theta_hat);

/// The closed-form summands appearing in the convexity computations, for one
/// eigenvalue lambda and frame components u, v of the real/imaginary gradient
/// parts. `critical` and `geodesic` follow the trigonometric displays (with
/// theta_a = arccot lambda and the phase gap eta); `square_form` is the
/// algebraic square |lambda v - u|^2 / (1 + lambda^2) they both reduce to
/// (`geodesic` after multiplication by cos eta).
struct ConvexitySummands {
  double critical;
  double geodesic;
  double kgeod_weight;  // cos(eta) + sin(eta)/lambda
  double square_form;
};

ConvexitySummands convexity_summands(double lambda, double eta, Complex u,
                                     Complex v);

}  // namespace cklab
