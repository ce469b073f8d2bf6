#ifndef LAGFV_CONSTITUTIVE_HPP
#define LAGFV_CONSTITUTIVE_HPP

#include <stdexcept>
#include <string>

#include "lagfv/types.hpp"

namespace lagfv {

struct invalid_state : std::runtime_error {
  explicit invalid_state(const std::string& what) : std::runtime_error(what) {}
};

enum class EosKind { neo_hookean, stiffened_gas };

// Isotropic hyperelastic material: volumetric EOS plus a one-parameter
// family of isochoric stored energies with
//   dPsi_s/dI1bar = -mu a / (2 rho0),  dPsi_s/dI2bar = mu (1+a) I2bar / (6 rho0).
// a = -1 is neo-Hookean shear.
struct Material {
  double rho0 = 1.0;
  double E = 0.0;
  double nu = 0.0;
  double mu = 0.0;
  double a = -1.0;  // in [-1, 1/2], hyperbolicity range
  EosKind eos = EosKind::neo_hookean;
  double gamma = 0.0;   // stiffened gas
  double p_inf = 0.0;   // stiffened gas
};

// Validates ranges and derives mu = E / (2 (1 + nu)).
Material make_material(double rho0, double E, double nu, double a = -1.0,
                       EosKind eos = EosKind::neo_hookean, double gamma = 0.0,
                       double p_inf = 0.0);

struct Invariants {
  double I1, I2, I3;
};

// Principal invariants: I1 = tr A, I2 = (tr^2 A - tr A^2)/2, I3 = det A.
Invariants invariants(const mat3& A);

// Kinematic quantities derived from the left Cauchy-Green tensor.
struct StrainState {
  sym3 B;
  double J;      // sqrt(det B)
  sym3 Bbar;     // J^{-2/3} B, det = 1
  sym3 Bbar_inv;
  double I1bar, I2bar;
};

// Throws invalid_state when det B <= 0 or B is non-finite.
StrainState strain_state(const sym3& B);

// Volumetric pressure. eps_v (volumetric specific internal energy) is used
// by the stiffened gas only: p = (gamma-1) rho eps_v - gamma p_inf with
// rho = rho0 / J.
double pressure(const Material& m, double J, double eps_v = 0.0);

// Trace-free part of the Cauchy stress,
//   T0 = 2 rho ( dPsi_s/dI1bar [Bbar]_0 - dPsi_s/dI2bar [Bbar^{-1}]_0 ).
sym3 deviatoric_stress(const StrainState& s, const Material& m);

// Full Cauchy stress T = -p Id + T0. eps = total specific internal energy;
// the stiffened gas peels off Psi_s to get eps_v.
sym3 cauchy_stress(const StrainState& s, const Material& m, double eps = 0.0);

// Free energies per unit mass. Neo-Hookean volumetric:
// Psi_v = mu/(4 rho0) ((J-1)^2 + (log J)^2). The stiffened gas has no
// stored volumetric energy; its Psi_v is bookkept as eps_v.
double free_energy_vol(const Material& m, double J, double eps_v = 0.0);
double free_energy_shear(const StrainState& s, const Material& m);

// Longitudinal wave-speed estimate a_c = sqrt(max(c_v^2, 1e-14) + 4 mu /(3 rho))
// with c_v^2 = dp/drho of the volumetric EOS.
double wave_speed(const Material& m, const StrainState& s, double eps = 0.0);

// One-stop evaluation used by the solver hot path. Returns false instead of
// throwing when B is not a valid strain state (det <= 0 or non-finite).
struct StressEval {
  double J = 0.0;
  double rho = 0.0;
  double p = 0.0;
  sym3 T;        // full Cauchy stress
  double a_c = 0.0;
  double psi = 0.0;  // Psi_v + Psi_s
};
bool evaluate_stress(const Material& m, const sym3& B, double eps, StressEval& out);

}  // namespace lagfv

#endif
