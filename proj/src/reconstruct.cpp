#include "lagfv/reconstruct.hpp"

#include <algorithm>
#include <cmath>

namespace lagfv {

StateVec eval_poly(const LinearPoly& poly, int level, vec2 x) {
  StateVec out = poly.mean;
  if (level == kP0) return out;
  vec2 d = x - poly.centroid;
  for (int k = 0; k < NVAR; k++) {
    double phi = level == kP1 ? 1.0 : poly.phi_bj[k];
    out[k] += phi * dot(poly.grad[k], d);
  }
  return out;
}

vec2 least_squares_gradient(const vec2* dx, const double* dq, int n) {
  if (n < 2) return {0.0, 0.0};
  double axx = 0, axy = 0, ayy = 0, bx = 0, by = 0;
  for (int i = 0; i < n; i++) {
    axx += dx[i].x * dx[i].x;
    axy += dx[i].x * dx[i].y;
    ayy += dx[i].y * dx[i].y;
    bx += dx[i].x * dq[i];
    by += dx[i].y * dq[i];
  }
  double tr = axx + ayy;
  double det = axx * ayy - axy * axy;
  if (det <= 1e-12 * tr * tr) return {0.0, 0.0};
  return {(ayy * bx - axy * by) / det, (axx * by - axy * bx) / det};
}

double barth_jespersen(double qc, vec2 grad, const vec2* dxv, int nv, double qmin,
                       double qmax) {
  double phi = 1.0;
  for (int i = 0; i < nv; i++) {
    double d = dot(grad, dxv[i]);
    double r;
    if (d > 0.0)
      r = (qmax - qc) / d;
    else if (d < 0.0)
      r = (qmin - qc) / d;
    else
      continue;
    phi = std::min(phi, std::clamp(r, 0.0, 1.0));
  }
  return phi;
}

std::vector<LinearPoly> reconstruct_states(const MeshTopology& topo,
                                           const std::vector<vec2>& x,
                                           const std::vector<StateVec>& q) {
  int nc = topo.n_cells();
  std::vector<vec2> centroid(nc);
  for (int c = 0; c < nc; c++)
    centroid[c] = (1.0 / 3.0) * (x[topo.cells[c][0]] + x[topo.cells[c][1]] +
                                 x[topo.cells[c][2]]);

  std::vector<LinearPoly> polys(nc);
  for (int c = 0; c < nc; c++) {
    LinearPoly& poly = polys[c];
    poly.mean = q[c];
    poly.centroid = centroid[c];

    int nn = 0;
    int neigh[3];
    vec2 dx[3];
    for (int k = 0; k < 3; k++) {
      auto fc = topo.face_cells[topo.cell_faces[c][k]];
      int j = fc[0] == c ? fc[1] : fc[0];
      if (j < 0) continue;
      neigh[nn] = j;
      dx[nn] = centroid[j] - centroid[c];
      nn++;
    }

    poly.degenerate = nn < 2;
    if (nn >= 2) {
      double axx = 0, axy = 0, ayy = 0;
      for (int i = 0; i < nn; i++) {
        axx += dx[i].x * dx[i].x;
        axy += dx[i].x * dx[i].y;
        ayy += dx[i].y * dx[i].y;
      }
      double tr = axx + ayy;
      poly.degenerate = (axx * ayy - axy * axy) <= 1e-12 * tr * tr;
    }
    if (poly.degenerate) {
      for (int k = 0; k < NVAR; k++) {
        poly.grad[k] = {0.0, 0.0};
        poly.phi_bj[k] = 0.0;
      }
      continue;
    }

    vec2 dxv[3];
    for (int k = 0; k < 3; k++) dxv[k] = x[topo.cells[c][k]] - centroid[c];

    for (int k = 0; k < NVAR; k++) {
      double dq[3];
      double qmin = q[c][k], qmax = q[c][k];
      for (int i = 0; i < nn; i++) {
        dq[i] = q[neigh[i]][k] - q[c][k];
        qmin = std::min(qmin, q[neigh[i]][k]);
        qmax = std::max(qmax, q[neigh[i]][k]);
      }
      poly.grad[k] = least_squares_gradient(dx, dq, nn);
      poly.phi_bj[k] = barth_jespersen(q[c][k], poly.grad[k], dxv, 3, qmin, qmax);
    }
  }
  return polys;
}

namespace {

// Corner stress and impedance of a state vector; false on invalid strain.
bool corner_eval(const Material& mat, const StateVec& q, StressEval& ev) {
  CellState s = unpack(q);
  double eps = s.e - 0.5 * dot(s.v, s.v);
  return evaluate_stress(mat, s.B, eps, ev);
}

Predictor frozen_state(const MeshTopology& topo, int cell, const LinearPoly& poly,
                       const Material& mat, bool ok) {
  (void)topo;
  (void)cell;
  Predictor pred;
  pred.q_star = poly.mean;
  pred.ok = ok;
  pred.iters = 0;
  CellState s = unpack(poly.mean);
  for (int k = 0; k < 3; k++) pred.v_node[k] = s.v;
  StressEval ev;
  if (corner_eval(mat, poly.mean, ev) && s.tau > 0.0) {
    for (int k = 0; k < 3; k++) pred.T_node[k] = ev.T;
    pred.z = ev.a_c / s.tau;
  } else {
    for (int k = 0; k < 3; k++) pred.T_node[k] = sym3{};
    pred.z = mat.rho0;  // positive placeholder, cell is pre-marked anyway
    pred.ok = false;
  }
  return pred;
}

}  // namespace

Predictor ader_predict(const MeshTopology& topo, const std::vector<vec2>& x,
                       int cell, const LinearPoly& poly, int level,
                       const Material& mat, double m_c, double dt) {
  if (level == kP0 || dt == 0.0) return frozen_state(topo, cell, poly, mat, true);

  vec2 xp[3];
  StateVec w_node[3];
  for (int k = 0; k < 3; k++) {
    xp[k] = x[topo.cells[cell][k]];
    w_node[k] = eval_poly(poly, level, xp[k]);
  }

  const double half = 0.5 * dt;
  StateVec q_star = poly.mean;
  StateVec qdot{};
  StateVec q_node[3];
  StressEval ev_node[3];
  int iters = 0;

  for (int it = 0; it < 2; it++) {
    iters = it + 1;
    for (int k = 0; k < 3; k++)
      for (int i = 0; i < NVAR; i++) q_node[k][i] = w_node[k][i] + half * qdot[i];

    for (int k = 0; k < 3; k++)
      if (!corner_eval(mat, q_node[k], ev_node[k]))
        return frozen_state(topo, cell, poly, mat, false);

    vec2 xs[3], vn[3];
    for (int k = 0; k < 3; k++) {
      vn[k] = {q_node[k][1], q_node[k][2]};
      xs[k] = xp[k] + half * vn[k];
    }
    double vol = cell_volume(xs[0], xs[1], xs[2]);
    if (!(vol > 0.0)) return frozen_state(topo, cell, poly, mat, false);

    double taudot = 0.0, edot = 0.0;
    vec2 vdot{0.0, 0.0};
    mat2 L{};
    for (int k = 0; k < 3; k++) {
      vec2 cnr = corner_vector(xs[0], xs[1], xs[2], k);
      const sym3& T = ev_node[k].T;
      vec2 traction{T.xx * cnr.x + T.xy * cnr.y, T.xy * cnr.x + T.yy * cnr.y};
      taudot += dot(cnr, vn[k]);
      vdot += traction;
      edot += dot(traction, vn[k]);
      L = L + outer(vn[k], cnr);
    }
    taudot /= m_c;
    vdot = (1.0 / m_c) * vdot;
    edot /= m_c;
    L = (1.0 / vol) * L;

    CellState sc = unpack(q_star);
    mat3 L3 = embed(L);
    mat3 bdot = L3 * to_mat3(sc.B) + to_mat3(sc.B) * transpose(L3);

    StateVec qdot_new{taudot, vdot.x,        vdot.y,        edot,         bdot.a[0][0],
                      bdot.a[1][1], bdot.a[2][2], bdot.a[0][1], bdot.a[0][2], bdot.a[1][2]};
    StateVec q_new;
    double change = 0.0;
    for (int i = 0; i < NVAR; i++) {
      q_new[i] = poly.mean[i] + half * qdot_new[i];
      double scale = std::max({std::abs(q_new[i]), std::abs(q_star[i]), 1e-30});
      change = std::max(change, std::abs(q_new[i] - q_star[i]) / scale);
    }
    q_star = q_new;
    qdot = qdot_new;
    if (change <= 1e-12) break;
  }

  Predictor pred;
  pred.q_star = q_star;
  pred.iters = iters;
  for (int k = 0; k < 3; k++) {
    for (int i = 0; i < NVAR; i++) q_node[k][i] = w_node[k][i] + half * qdot[i];
    if (!corner_eval(mat, q_node[k], ev_node[k]))
      return frozen_state(topo, cell, poly, mat, false);
    pred.v_node[k] = {q_node[k][1], q_node[k][2]};
    pred.T_node[k] = ev_node[k].T;
  }
  CellState sc = unpack(q_star);
  StressEval ev_cell;
  if (!(sc.tau > 0.0) || !corner_eval(mat, q_star, ev_cell))
    return frozen_state(topo, cell, poly, mat, false);
  pred.z = ev_cell.a_c / sc.tau;
  pred.ok = std::isfinite(pred.z) && pred.z > 0.0;
  if (!pred.ok) return frozen_state(topo, cell, poly, mat, false);
  return pred;
}

}  // namespace lagfv
