#ifndef LAGFV_RECONSTRUCT_HPP
#define LAGFV_RECONSTRUCT_HPP

#include <vector>

#include "lagfv/constitutive.hpp"
#include "lagfv/mesh.hpp"
#include "lagfv/state.hpp"

namespace lagfv {

// Conservative piecewise-linear cell polynomial. grad is the unlimited
// least-squares gradient; phi_bj the Barth-Jespersen factor. The factor
// actually applied depends on the cell level at evaluation time.
struct LinearPoly {
  StateVec mean{};
  std::array<vec2, NVAR> grad{};
  StateVec phi_bj{};
  vec2 centroid{0.0, 0.0};
  bool degenerate = false;  // rank-deficient stencil, forced constant
};

// mean + phi(level) * grad . (x - centroid)
StateVec eval_poly(const LinearPoly& poly, int level, vec2 x);

// Unlimited least-squares gradient from n neighbor offsets dx[i] = x_i - x_c
// and increments dq[i] = q_i - q_c. Rank-deficient input returns zero.
vec2 least_squares_gradient(const vec2* dx, const double* dq, int n);

// Largest phi in [0,1] such that qc + phi * grad . dxv[i] stays inside
// [qmin, qmax] at every one of the nv vertex offsets.
double barth_jespersen(double qc, vec2 grad, const vec2* dxv, int nv, double qmin,
                       double qmax);

// Builds polynomials for every cell from face-neighbor stencils. Cells with
// fewer than two independent neighbor directions become constants.
std::vector<LinearPoly> reconstruct_states(const MeshTopology& topo,
                                           const std::vector<vec2>& x,
                                           const std::vector<StateVec>& q);

// Local space-time predictor at t* = t^{n+1/2}: cell state, corner
// velocities/stresses and the acoustic impedance, all extrapolated to the
// half time level by Picard iteration of the cell-local evolution coupled
// with the corner trajectories. Level kP0 returns the t^n state.
struct Predictor {
  StateVec q_star{};
  std::array<vec2, 3> v_node{};
  std::array<sym3, 3> T_node{};
  double z = 0.0;
  bool ok = true;   // false: fell back to the t^n state, pre-mark for MOOD
  int iters = 0;
};

Predictor ader_predict(const MeshTopology& topo, const std::vector<vec2>& x,
                       int cell, const LinearPoly& poly, int level,
                       const Material& mat, double m_c, double dt);

}  // namespace lagfv

#endif
