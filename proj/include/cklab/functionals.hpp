#pragma once

#include <string>
#include <vector>

#include "cklab/class_algebra.hpp"
#include "cklab/torus.hpp"

namespace cklab {

/// Complexified potential phi = u + i v on a torus grid. u displaces the
/// B-field, v the Kaehler form; both are kept mean-zero.
struct ComplexPotential {
  ScalarField u;
  ScalarField v;
};

ComplexPotential make_potential(ScalarField u, ScalarField v);

/// Displaced fields omega_v = omega0 + i ddbar v (positive) and
/// B_u = B0 + i ddbar u.
FormField metric_of(const ComplexPotential& phi, const ClassData& cd);
FormField bfield_of(const ComplexPotential& phi, const ClassData& cd);

/// Pointwise minimum of cos(Theta - theta_hat); the potential is almost
/// calibrated when this is positive.
double calibration_margin(const ComplexPotential& phi, const ClassData& cd);

/// Relative entropy H(v) = int log(omega_v^n / omega0^n) omega_v^n.
double entropy(const ScalarField& v, const Matrix& omega0_rep);

/// Energy E(v) = int v sum_j omega0^j omega_v^{n-j}, or its twisted version
/// with an extra fixed form eta when `twist` is non-null.
double energy_family(const ScalarField& v, const Matrix& omega0_rep,
                     const FormField* twist = nullptr);

/// E^C(phi) = int phi sum_j (omega0^C)^j (omega_phi^C)^{n-j}.
Complex complexified_energy(const ComplexPotential& phi, const ClassData& cd);

/// The decomposition H(v) + c_gamma/(n+1) E(v) - E_{Ric}(v)
/// + Im(gamma E^C)/(n+1); the Ricci term vanishes on the flat reference.
double complexified_k_energy(const ComplexPotential& phi, const ClassData& cd);

/// sigma(dir) = int Im[dir (gamma (omega^C)^n - (s - c_gamma) omega^n)]
/// evaluated at omega^C_phi.
double first_variation(const ComplexPotential& phi, const ComplexPotential& dir,
                       const ClassData& cd);

struct CalabiValue {
  double value;      // int |s - gamma (omega^C)^n / omega^n|^2 omega^n
  double deviation;  // int |scB - c_gamma|^2 omega^n
  double floor;      // c_gamma^2 Vol
};

CalabiValue complexified_calabi(const ComplexPotential& phi,
                                const ClassData& cd);

/// Jacob-Yau volume int |(B_u + i omega)^n| of the displaced B-field against
/// a fixed metric.
double volume_functional(const ScalarField& u, const FormField& metric,
                         const ClassData& cd);

/// Batch evaluation: one CSV row per potential, one functional per column.
void batch_evaluate_csv(const std::string& path,
                        const std::vector<ComplexPotential>& phis,
                        const ClassData& cd);

}  // namespace cklab
