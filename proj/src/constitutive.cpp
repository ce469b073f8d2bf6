#include "lagfv/constitutive.hpp"

#include <algorithm>
#include <cmath>

namespace lagfv {

Material make_material(double rho0, double E, double nu, double a, EosKind eos,
                       double gamma, double p_inf) {
  if (!(rho0 > 0.0)) throw invalid_state("material: rho0 must be positive");
  if (!(E >= 0.0)) throw invalid_state("material: E must be non-negative");
  if (!(nu > -1.0 && nu < 0.5)) throw invalid_state("material: nu must lie in (-1, 1/2)");
  if (!(a >= -1.0 && a <= 0.5)) throw invalid_state("material: a must lie in [-1, 1/2]");
  if (eos == EosKind::stiffened_gas) {
    if (!(gamma > 1.0)) throw invalid_state("material: stiffened gas needs gamma > 1");
    if (!(p_inf >= 0.0)) throw invalid_state("material: stiffened gas needs p_inf >= 0");
  }
  Material m;
  m.rho0 = rho0;
  m.E = E;
  m.nu = nu;
  m.mu = E / (2.0 * (1.0 + nu));
  m.a = a;
  m.eos = eos;
  m.gamma = gamma;
  m.p_inf = p_inf;
  return m;
}

Invariants invariants(const mat3& A) {
  Invariants i;
  i.I1 = trace(A);
  i.I2 = 0.5 * (i.I1 * i.I1 - trace(A * A));
  i.I3 = det(A);
  return i;
}

StrainState strain_state(const sym3& B) {
  if (!is_finite(B)) throw invalid_state("strain state: non-finite B");
  double d = det(B);
  if (!(d > 0.0)) throw invalid_state("strain state: det B = " + std::to_string(d));
  StrainState s;
  s.B = B;
  s.J = std::sqrt(d);
  s.Bbar = (1.0 / std::cbrt(d)) * B;
  s.Bbar_inv = inverse(s.Bbar);
  s.I1bar = trace(s.Bbar);
  double tr2 = s.Bbar.xx * s.Bbar.xx + s.Bbar.yy * s.Bbar.yy + s.Bbar.zz * s.Bbar.zz +
               2.0 * (s.Bbar.xy * s.Bbar.xy + s.Bbar.xz * s.Bbar.xz + s.Bbar.yz * s.Bbar.yz);
  s.I2bar = 0.5 * (s.I1bar * s.I1bar - tr2);
  return s;
}

double pressure(const Material& m, double J, double eps_v) {
  if (!(J > 0.0)) throw invalid_state("pressure: J = " + std::to_string(J));
  if (m.eos == EosKind::stiffened_gas)
    return (m.gamma - 1.0) * (m.rho0 / J) * eps_v - m.gamma * m.p_inf;
  return -0.5 * m.mu * (J - 1.0 + std::log(J) / J);
}

sym3 deviatoric_stress(const StrainState& s, const Material& m) {
  double rho = m.rho0 / s.J;
  double dpsi1 = -m.mu * m.a / (2.0 * m.rho0);
  double dpsi2 = m.mu * (1.0 + m.a) * s.I2bar / (6.0 * m.rho0);
  return (2.0 * rho * dpsi1) * deviator(s.Bbar) - (2.0 * rho * dpsi2) * deviator(s.Bbar_inv);
}

double free_energy_vol(const Material& m, double J, double eps_v) {
  if (m.eos == EosKind::stiffened_gas) return eps_v;
  double jm1 = J - 1.0, lj = std::log(J);
  return m.mu / (4.0 * m.rho0) * (jm1 * jm1 + lj * lj);
}

double free_energy_shear(const StrainState& s, const Material& m) {
  return -m.mu * m.a / (2.0 * m.rho0) * (s.I1bar - 3.0) +
         m.mu * (1.0 + m.a) / (12.0 * m.rho0) * (s.I2bar * s.I2bar - 9.0);
}

sym3 cauchy_stress(const StrainState& s, const Material& m, double eps) {
  double eps_v = (m.eos == EosKind::stiffened_gas) ? eps - free_energy_shear(s, m) : 0.0;
  return pressure(m, s.J, eps_v) * -1.0 * sym3_identity() + deviatoric_stress(s, m);
}

double wave_speed(const Material& m, const StrainState& s, double eps) {
  double cv2;
  if (m.eos == EosKind::stiffened_gas) {
    double eps_v = eps - free_energy_shear(s, m);
    cv2 = (m.gamma - 1.0) * eps_v;
  } else {
    cv2 = 0.5 * m.mu / m.rho0 * (s.J * s.J + 1.0 - std::log(s.J));
  }
  double rho = m.rho0 / s.J;
  return std::sqrt(std::max(cv2, 1e-14) + 4.0 * m.mu / (3.0 * rho));
}

bool evaluate_stress(const Material& m, const sym3& B, double eps, StressEval& out) {
  if (!is_finite(B) || !std::isfinite(eps)) return false;
  double d = det(B);
  if (!(d > 0.0)) return false;
  StrainState s = strain_state(B);
  out.J = s.J;
  out.rho = m.rho0 / s.J;
  double psi_s = free_energy_shear(s, m);
  double eps_v = (m.eos == EosKind::stiffened_gas) ? eps - psi_s : 0.0;
  out.p = pressure(m, s.J, eps_v);
  out.T = (-out.p) * sym3_identity() + deviatoric_stress(s, m);
  out.a_c = wave_speed(m, s, eps);
  out.psi = free_energy_vol(m, s.J, eps_v) + psi_s;
  return out.a_c > 0.0 && std::isfinite(out.a_c) && is_finite(out.T);
}

}  // namespace lagfv
