#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cklab/cp1.hpp"
#include "cklab/functionals.hpp"

namespace cklab {

/// Time-sampled path of complexified potentials on the torus backend.
/// Constructions that know their time-derivatives in closed form attach them;
/// residual routines otherwise fall back to central differences.
struct TorusPath {
  std::vector<double> times;
  std::vector<ComplexPotential> samples;
  std::vector<ComplexPotential> dot, ddot;
  bool has_analytic_derivatives = false;
};

struct SecondVariation {
  double analytic;
  double finite_diff;
};

/// Second variation of the complexified K-energy at an interior time index:
/// the expanded integrand evaluated with path derivatives, and the plain
/// second difference of the K-energy.
SecondVariation second_variation_along_path(const TorusPath& path,
                                            const ClassData& cd, int t_index);
SecondVariation second_variation_along_path(const cp1::Path& path,
                                            const cp1::Cp1Reference& ref,
                                            int t_index);

/// Sup-norms per interior time of the two coupled geodesic equations:
/// Im(phi..) - |del Im(phi.)|^2 and Re[e^{-i theta}(phi.. (w^C)^n - n i del
/// phi. dbar phi. (w^C)^{n-1})].
struct ResidualPair {
  std::vector<double> first;
  std::vector<double> second;
};

ResidualPair residual_coupled(const TorusPath& path, const ClassData& cd);
ResidualPair residual_coupled(const cp1::Path& path,
                              const cp1::Cp1Reference& ref);

/// The two independent Kaehler geodesic equations (the second with respect to
/// the displaced B-metric, which must stay positive).
ResidualPair residual_kahler_pair(const TorusPath& path, const ClassData& cd);
ResidualPair residual_kahler_pair(const cp1::Path& path,
                                  const cp1::Cp1Reference& ref);

/// Annulus-lift diagnostics per interior time. identity_err compares the
/// product-space top power assembled with discrete time-derivatives against
/// the same assembly with the path's analytic derivatives; the residual
/// columns are the two lifted geodesic equations, and calibration_min tracks
/// the sign of Re[e^{-i(pi/2+theta)} (...)^{n+1}].
struct AnnulusResult {
  std::vector<double> identity_err;
  std::vector<double> res_imaginary;
  std::vector<double> res_argument;
  std::vector<double> calibration_min;
};

AnnulusResult annulus_residual(const TorusPath& path, const ClassData& cd);
AnnulusResult annulus_residual(const cp1::Path& path,
                               const cp1::Cp1Reference& ref);

/// Central second differences (divided by dt^2) of a functional along a path.
std::vector<double> second_differences(const std::vector<double>& times,
                                       const std::vector<double>& values);

std::vector<double> convexity_probe(
    const TorusPath& path,
    const std::function<double(const ComplexPotential&)>& functional);
std::vector<double> convexity_probe(
    const cp1::Path& path,
    const std::function<double(const cp1::Potential&)>& functional);

std::vector<double> convexity_probe_kenergy(const TorusPath& path,
                                            const ClassData& cd);
std::vector<double> convexity_probe_kenergy(const cp1::Path& path,
                                            const cp1::Cp1Reference& ref);

/// Hypercritical weight cos(eta) + sin(eta)/lambda_a, minimized over all
/// samples, points and eigenvalue indices of a path.
double min_kgeod_weight(const cp1::Path& path, const cp1::Cp1Reference& ref);

// Versioned binary path snapshots and per-time CSV residual tables.
void write_path_binary(const std::string& path, const TorusPath& p);
TorusPath read_path_binary(const std::string& path);
void write_residual_csv(const std::string& path,
                        const std::vector<double>& times,
                        const ResidualPair& res);

}  // namespace cklab
