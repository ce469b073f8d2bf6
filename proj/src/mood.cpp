#include "lagfv/mood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lagfv/reconstruct.hpp"

namespace lagfv {

DetectReason detect_cell(const CellState& cand, double rho_new, double Lc_new,
                         double rho0, double rho_min_n, double rho_max_n,
                         const DetectionCriteria& crit) {
  if (!std::isfinite(cand.tau) || !std::isfinite(cand.v.x) || !std::isfinite(cand.v.y) ||
      !std::isfinite(cand.e) || !is_finite(cand.B))
    return DetectReason::not_finite;
  if (!(cand.tau > 0.0)) return DetectReason::negative_tau;
  double kin = 0.5 * dot(cand.v, cand.v);
  double eps = cand.e - kin;
  // e - kin carries truncation noise at a fraction of the energy scale even
  // in healthy runs; the scale must not come from |e| itself or a diverging
  // e would inflate its own tolerance.
  double floor = crit.eps_rel * std::max({kin, crit.eps_scale, 1e-30});
  if (eps < -floor) return DetectReason::negative_eps;
  if (!is_spd(cand.B)) return DetectReason::not_spd;
  double delta = std::max(crit.delta0 * rho0, crit.delta1 * (rho_max_n - rho_min_n));
  if (!(rho_new > 0.0) || rho_new < rho_min_n - delta || rho_new > rho_max_n + delta)
    return DetectReason::rdmp;
  if (crit.check_involution) {
    // B transports as dB/dt = LB + BL^t, so sqrt(det B) tracks the volume
    // ratio J = rho0/rho; the strain and geometric measures of J must agree.
    double gap = std::fabs(std::sqrt(det(cand.B)) - rho0 / rho_new);
    if (!(gap < Lc_new * Lc_new * Lc_new)) return DetectReason::involution;
  }
  return DetectReason::accept;
}

std::vector<int> decrement(SchemeLevelMap& map, const std::vector<int>& troubled,
                           const MeshTopology& topo, bool two_level) {
  std::vector<int> rec;
  rec.reserve(4 * troubled.size());
  for (int c : troubled) {
    if (map.level[c] > kP0) map.level[c] = two_level ? kP0 : map.level[c] - 1;
    rec.push_back(c);
    for (int k = 0; k < 3; ++k) {
      int f = topo.cell_faces[c][k];
      int o = topo.face_cells[f][0] == c ? topo.face_cells[f][1] : topo.face_cells[f][0];
      if (o >= 0) rec.push_back(o);
    }
  }
  std::sort(rec.begin(), rec.end());
  rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
  return rec;
}

namespace {

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

double mood_step(SimState& s, const BcTable& bc, const MoodParams& par, double dt_req,
                 MoodStats* stats) {
  const MeshTopology& topo = s.mesh.topo;
  const int nc = topo.n_cells();
  const int np = topo.n_nodes;
  if (!(dt_req > 0.0) || !std::isfinite(dt_req))
    throw std::invalid_argument("mood_step: time step must be positive and finite");

  MoodStats local;
  MoodStats& st = stats ? *stats : local;

  // Reconstruction and detection bounds live on the accepted t^n data and do
  // not depend on the step size.
  std::vector<StateVec> qvec(nc);
  for (int c = 0; c < nc; ++c) qvec[c] = pack(s.q[c]);
  std::vector<LinearPoly> polys = reconstruct_states(topo, s.mesh.x, qvec);

  std::vector<double> rho_n(nc), rho_min(nc), rho_max(nc);
  for (int c = 0; c < nc; ++c) rho_n[c] = s.mass.m_cell[c] / s.geom.vol[c];

  // Energy scale of the state being advanced, for the positivity floor.
  DetectionCriteria crit = par.crit;
  for (int c = 0; c < nc; ++c)
    crit.eps_scale = std::max({crit.eps_scale, std::fabs(s.q[c].e),
                               0.5 * dot(s.q[c].v, s.q[c].v)});
  for (int c = 0; c < nc; ++c) {
    double mn = rho_n[c], mx = rho_n[c];
    for (int k = 0; k < 3; ++k) {
      int f = topo.cell_faces[c][k];
      int o = topo.face_cells[f][0] == c ? topo.face_cells[f][1] : topo.face_cells[f][0];
      if (o < 0) continue;
      mn = std::min(mn, rho_n[o]);
      mx = std::max(mx, rho_n[o]);
    }
    rho_min[c] = mn;
    rho_max[c] = mx;
  }

  // First incident contact-wall tag per node, for landing and release tests.
  std::vector<int> contact_tag(np, -1);
  for (int p = 0; p < np; ++p) {
    for (int i = bc.node_face_off[p]; i < bc.node_face_off[p + 1]; ++i) {
      int tag = topo.face_tag[bc.node_face[i]];
      if (bc.by_tag[tag].kind == BcKind::contact) {
        contact_tag[p] = tag;
        break;
      }
    }
  }

  std::vector<int> all_cells(nc);
  std::iota(all_cells.begin(), all_cells.end(), 0);

  std::vector<Predictor> preds(nc);
  std::vector<vec2> v_cp(3 * nc);
  std::vector<sym3> T_cp(3 * nc);
  std::vector<double> z_cell(nc);
  std::vector<uint8_t> premark(nc, 0);
  std::vector<vec2> v_p(np);
  std::vector<vec2> v_new_node(np);
  std::vector<uint8_t> stuck_w;
  std::vector<vec2> x_new;
  std::vector<double> vol_new(nc), Lc_new(nc);
  std::vector<CellState> q_new;
  std::vector<double> entropy(nc, 0.0);
  std::vector<int> cn_fb;
  SchemeLevelMap map;
  std::vector<uint8_t> soft_spent;

  // A node landing within the step clips dt to the landing time and redoes
  // the whole step; the relative guard absorbs the roundoff of recomputing
  // the same landing time at the clipped dt.
  const double land_guard = 1.0 - 1e-12;
  double dt = dt_req;
  int attempts = 0;
  bool done = false;

  while (!done) {
    if (++attempts > 64)
      throw std::runtime_error("mood_step: contact landing clip failed to settle");
    st = MoodStats{};
    stuck_w = s.stuck;
    map.level.assign(nc, kP1);
    soft_spent.assign(nc, 0);
    const double t_star = s.t + 0.5 * dt;

    auto predict = [&](int c) {
      preds[c] = ader_predict(topo, s.mesh.x, c, polys[c], map.level[c], s.mat,
                              s.mass.m_cell[c], dt);
      premark[c] = preds[c].ok ? 0 : 1;
      if (!preds[c].ok) st.predictor_fallbacks++;
      for (int k = 0; k < 3; ++k) {
        v_cp[3 * c + k] = preds[c].v_node[k];
        T_cp[3 * c + k] = preds[c].T_node[k];
      }
      z_cell[c] = preds[c].z;
    };
    for (int c = 0; c < nc; ++c) predict(c);

    // Release pass: a stuck node whose unconstrained velocity points off the
    // wall leaves the constrained set for this step.
    for (int p = 0; p < np; ++p) {
      if (!stuck_w[p] || contact_tag[p] < 0) continue;
      const BcSpec& spec = bc.by_tag[contact_tag[p]];
      vec2 trial = solve_node_unconstrained(topo, s.mesh.x, v_cp, T_cp, z_cell, bc,
                                            t_star, p);
      if (dot(trial, spec.wall_n) / norm(spec.wall_n) > 0.0) {
        stuck_w[p] = 0;
        st.events.push_back({p, -1});
      }
    }

    NodeSolveStats nstats;
    solve_nodes(topo, s.mesh.x, v_cp, T_cp, z_cell, bc, stuck_w, t_star, nullptr, v_p,
                &nstats);
    st.dropped_constraints += nstats.dropped_constraints;

    double t_land = std::numeric_limits<double>::infinity();
    for (int p = 0; p < np; ++p) {
      if (stuck_w[p] || contact_tag[p] < 0) continue;
      t_land = std::min(t_land, wall_landing_time(s.mesh.x[p], v_p[p],
                                                  bc.by_tag[contact_tag[p]]));
    }
    if (t_land < dt * land_guard) {
      dt = t_land;
      continue;
    }

    // Candidate update of the whole mesh.
    x_new = move_nodes(s.mesh.x, v_p, dt);
    for (int c = 0; c < nc; ++c) {
      const auto& cell = topo.cells[c];
      vol_new[c] = cell_volume(x_new[cell[0]], x_new[cell[1]], x_new[cell[2]]);
      Lc_new[c] = characteristic_length(x_new[cell[0]], x_new[cell[1]], x_new[cell[2]]);
    }
    q_new = s.q;
    entropy.assign(nc, 0.0);
    CorrectorIn cin;
    cin.topo = &topo;
    cin.geom_n = &s.geom;
    cin.x_n = &s.mesh.x;
    cin.m_cell = &s.mass.m_cell;
    cin.q_n = &s.q;
    cin.v_cp = &v_cp;
    cin.T_cp = &T_cp;
    cin.z_cell = &z_cell;
    cin.v_p = &v_p;
    cin.dt = dt;
    correct_cells(cin, all_cells, q_new, entropy);
    // The ballistic extrapolation 2 v* - v^n only describes unconstrained
    // motion; a wall-held node ends the step at its constrained velocity.
    for (int p = 0; p < np; ++p)
      v_new_node[p] = stuck_w[p] ? v_p[p] : 2.0 * v_p[p] - s.v_node[p];
    cn_fb.clear();
    update_B_cells(topo, s.mesh.x, x_new, s.v_node, v_new_node, v_p, s.q, map.level,
                   dt, all_cells, q_new, &cn_fb);
    st.cn_fallbacks = static_cast<int>(cn_fb.size());

    // Detect / decrement / recompute until every cell is accepted. Levels
    // only decrease and the parachute is terminal, so this ends.
    std::vector<int> scope = all_cells;
    bool landing_restart = false;
    for (;;) {
      st.mood_iters++;
      std::vector<int> troubled;
      for (int c : scope) {
        // Density bounds take the t^n neighborhood range extended by the
        // neighbors' current candidate values: in the Lagrangian frame
        // density evolves by local volumetric work, so the whole neighborhood
        // drifts together and a cell is suspicious only when it leaves the
        // range of both the past and the present of its neighbors (a
        // grid-scale oscillation, which the limited recompute can cure).
        double mn = rho_min[c];
        double mx = rho_max[c];
        for (int k = 0; k < 3; ++k) {
          int f = topo.cell_faces[c][k];
          int o =
              topo.face_cells[f][0] == c ? topo.face_cells[f][1] : topo.face_cells[f][0];
          if (o < 0) continue;
          double ro = s.mass.m_cell[o] / vol_new[o];
          mn = std::min(mn, ro);
          mx = std::max(mx, ro);
        }
        DetectReason r = detect_cell(q_new[c], s.mass.m_cell[c] / vol_new[c], Lc_new[c],
                                     s.mat.rho0, mn, mx, crit);
        st.reason_counts[static_cast<int>(r)]++;
        if (r == DetectReason::accept && !premark[c]) continue;
        if (map.level[c] == kP0) {
          // The parachute is unconditionally accepted; a non-finite result
          // there means the step itself failed, not the limiting.
          if (r == DetectReason::not_finite)
            throw std::runtime_error(
                "mood_step: non-finite state survived the parachute scheme in cell " +
                std::to_string(c));
          if (r == DetectReason::negative_tau || r == DetectReason::negative_eps ||
              r == DetectReason::not_spd)
            st.pad_warnings++;
          continue;
        }
        troubled.push_back(c);
      }
      if (troubled.empty()) break;
      st.troubled_total += static_cast<int>(troubled.size());
      decrement(map, troubled, topo, par.two_level);

      // Every node of a troubled cell is re-resolved, so every cell sharing
      // one of those nodes consumed a changed velocity and must be
      // re-corrected; anything narrower breaks the force-closure telescoping
      // that makes the step conservative.
      std::vector<int> nodes;
      nodes.reserve(3 * troubled.size());
      for (int c : troubled)
        for (int k = 0; k < 3; ++k) nodes.push_back(topo.cells[c][k]);
      sort_unique(nodes);
      std::vector<int> recompute;
      for (int p : nodes)
        for (int i = topo.n2c_off[p]; i < topo.n2c_off[p + 1]; ++i)
          recompute.push_back(topo.n2c_cell[i]);
      sort_unique(recompute);

      for (int c : troubled) predict(c);
      NodeSolveStats rst;
      solve_nodes(topo, s.mesh.x, v_cp, T_cp, z_cell, bc, stuck_w, t_star, &nodes, v_p,
                  &rst);
      st.dropped_constraints += rst.dropped_constraints;

      double tl = std::numeric_limits<double>::infinity();
      for (int p : nodes) {
        if (stuck_w[p] || contact_tag[p] < 0) continue;
        tl = std::min(tl, wall_landing_time(s.mesh.x[p], v_p[p],
                                            bc.by_tag[contact_tag[p]]));
      }
      if (tl < dt * land_guard) {
        dt = tl;
        landing_restart = true;
        break;
      }

      for (int p : nodes) {
        x_new[p] = s.mesh.x[p] + dt * v_p[p];
        v_new_node[p] = stuck_w[p] ? v_p[p] : 2.0 * v_p[p] - s.v_node[p];
      }
      for (int c : recompute) {
        const auto& cell = topo.cells[c];
        vol_new[c] = cell_volume(x_new[cell[0]], x_new[cell[1]], x_new[cell[2]]);
        Lc_new[c] =
            characteristic_length(x_new[cell[0]], x_new[cell[1]], x_new[cell[2]]);
      }
      correct_cells(cin, recompute, q_new, entropy);
      cn_fb.clear();
      update_B_cells(topo, s.mesh.x, x_new, s.v_node, v_new_node, v_p, s.q, map.level,
                     dt, recompute, q_new, &cn_fb);
      st.cn_fallbacks += static_cast<int>(cn_fb.size());
      scope = std::move(recompute);
    }
    if (landing_restart) continue;
    done = true;
  }

  // Commit: the accepted mesh must be untangled.
  update_geometry(topo, x_new, s.geom, false);
  s.mesh.x = std::move(x_new);
  s.q = std::move(q_new);
  s.v_node = v_new_node;
  s.stuck = std::move(stuck_w);

  // Attach pass: free nodes that ended the step on the wall still pressing
  // into it become constrained from the next step on.
  for (int p = 0; p < np; ++p) {
    if (s.stuck[p] || contact_tag[p] < 0) continue;
    const BcSpec& spec = bc.by_tag[contact_tag[p]];
    double nn = norm(spec.wall_n);
    if (wall_distance(s.mesh.x[p], spec) <= spec.eps_d &&
        dot(v_p[p], spec.wall_n) / nn < 0.0) {
      s.stuck[p] = 1;
      // The wall absorbs the normal momentum at the landing instant.
      vec2 nh = (1.0 / nn) * spec.wall_n;
      s.v_node[p] = s.v_node[p] - dot(s.v_node[p], nh) * nh;
      st.events.push_back({p, +1});
    }
  }
  s.t += dt;

  for (int level : map.level) {
    if (level == kP0)
      st.n_p0++;
    else if (level == kP1BJ)
      st.n_p1bj++;
    else
      st.n_p1++;
  }
  // Consistency monitor: the strain tensor and the cell geometry integrate
  // the same motion, so their volume ratios sqrt(det B) and rho0/rho should
  // agree; the gap measures accumulated integration drift.
  for (int c = 0; c < nc; ++c) {
    double rho = s.mass.m_cell[c] / s.geom.vol[c];
    double dB = det(s.q[c].B);
    double gap = dB > 0.0 && rho > 0.0
                     ? std::fabs(std::sqrt(dB) - s.mat.rho0 / rho)
                     : std::numeric_limits<double>::infinity();
    double lc = s.geom.Lc[c];
    if (std::isfinite(gap))
      st.max_involution_gap = std::max(st.max_involution_gap, gap);
    if (!(gap < lc * lc * lc)) st.involution_violations++;
  }
  st.min_entropy = nc > 0 ? *std::min_element(entropy.begin(), entropy.end()) : 0.0;
  st.dt_used = dt;
  st.dt_clipped = dt != dt_req;
  st.level = std::move(map.level);
  return dt;
}

}  // namespace lagfv
