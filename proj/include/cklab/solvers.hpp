#pragma once

#include <string>
#include <vector>

#include "cklab/cp1.hpp"
#include "cklab/functionals.hpp"
#include "cklab/geodesics.hpp"
#include "cklab/surface.hpp"

namespace cklab {

struct SolverConfig {
  int max_iters = 10000;
  double tol = 1e-8;
  double step = 0.0;     // 0: derived from the grid spacing
  double damping = 0.5;  // step shrink factor on rejected updates
  double epsilon = 0.0;  // geodesic regularization strength
};

/// Reads {"max_iters":..,"tol":..,"step":..,"damping":..,"epsilon":..}
/// (all fields optional) from a JSON object.
SolverConfig solver_config_from_json(const std::string& text);

/// Explicit phase flow du/dt = Theta(omega^{-1} B_u) - theta_hat at fixed
/// metric, with residual-monotone adaptive stepping. Nonconvergence is
/// reported, not thrown.
struct FlowResult {
  ScalarField u;
  std::vector<double> residual_history;
  bool converged = false;
  bool calibration_warning = false;
  double residual = 0.0;
};

FlowResult dhym_flow(const ScalarField& initial_u, const FormField& metric,
                     const ClassData& cd, const SolverConfig& cfg);

/// Pointwise Lagrangian phase of (metric, B0 + i ddbar u).
ScalarField phase_field(const ScalarField& u, const FormField& metric,
                        const ClassData& cd);

/// Damped Newton for log(chi_v^2 / omega^2) = 0 over mean-zero v.
struct MaResult {
  ScalarField v;
  std::vector<double> residual_history;
  bool converged = false;
  double residual = 0.0;
};

MaResult ma_solve_surface(const FormField& omega, const Matrix& chi_class,
                          const SolverConfig& cfg);

/// Epsilon-regularized Kaehler geodesic boundary value problem on the n = 1
/// torus: (pi* omega0 + i DDbar Im Phi)^{n+1} = epsilon * reference volume.
struct BvpResult {
  TorusPath path;
  std::vector<double> residual_history;
  bool converged = false;
  double residual = 0.0;
};

BvpResult geodesic_bvp_epsilon(const ScalarField& v_start,
                               const ScalarField& v_end, const ClassData& cd,
                               int time_samples, const SolverConfig& cfg);

/// Preconditioned gradient descent on the complexified K-energy; stops when
/// both equations of the coupled system hold to tol.
struct DescentResult {
  ComplexPotential phi;
  std::vector<double> energy_history;
  double residual_phase = 0.0;
  double residual_curvature = 0.0;
  bool converged = false;
  bool calibration_warning = false;
};

DescentResult kenergy_descent(const ComplexPotential& initial,
                              const ClassData& cd, const SolverConfig& cfg);

struct Cp1DescentResult {
  cp1::Potential phi;
  std::vector<double> energy_history;
  double residual_phase = 0.0;
  double residual_curvature = 0.0;
  bool converged = false;
};

Cp1DescentResult kenergy_descent_cp1(const cp1::Potential& initial,
                                     const cp1::Cp1Reference& ref,
                                     const SolverConfig& cfg);

}  // namespace cklab
