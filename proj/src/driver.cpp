#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

#include "lagfv/driver.hpp"
#include "lagfv/output.hpp"

namespace lagfv {

DtChoice compute_dt(const SimState& s, const CflParams& cfl, double dt_prev) {
  const MeshTopology& topo = s.mesh.topo;
  const double inf = std::numeric_limits<double>::infinity();

  double dt_vol = inf;
  double dt_ac = inf;
  bool any_speed = false;
  for (int c = 0; c < topo.n_cells(); ++c) {
    double vdot = 0.0;
    for (int k = 0; k < 3; ++k)
      vdot += dot(s.geom.cnr[3 * c + k], s.v_node[topo.cells[c][k]]);
    if (std::fabs(vdot) > 0.0)
      dt_vol = std::min(dt_vol, cfl.c_v * s.geom.vol[c] / std::fabs(vdot));

    StressEval ev;
    double eps = s.q[c].e - 0.5 * dot(s.q[c].v, s.q[c].v);
    if (evaluate_stress(s.mat, s.q[c].B, eps, ev)) {
      dt_ac = std::min(dt_ac, cfl.c_cfl * s.geom.Lc[c] / ev.a_c);
      any_speed = true;
    }
  }
  if (!any_speed) throw std::runtime_error("compute_dt: no cell has a valid wave speed");

  double dt_incr = dt_prev > 0.0 ? (1.0 + cfl.c_i) * dt_prev : inf;

  DtChoice out;
  out.dt = dt_vol;
  out.branch = "volume";
  if (dt_ac < out.dt) {
    out.dt = dt_ac;
    out.branch = "acoustic";
  }
  if (dt_incr < out.dt) {
    out.dt = dt_incr;
    out.branch = "increase";
  }
  if (!(out.dt > 0.0) || !std::isfinite(out.dt))
    throw std::runtime_error("compute_dt: non-positive or non-finite time step");
  return out;
}

EnergyTotals energy_totals(const SimState& s) {
  EnergyTotals t;
  for (size_t c = 0; c < s.q.size(); ++c) {
    double m = s.mass.m_cell[c];
    const CellState& q = s.q[c];
    t.mass += m;
    t.momx += m * q.v.x;
    t.momy += m * q.v.y;
    t.energy += m * q.e;
    double kin = 0.5 * dot(q.v, q.v);
    t.kinetic += m * kin;
    StressEval ev;
    if (evaluate_stress(s.mat, q.B, q.e - kin, ev)) t.free_energy += m * ev.psi;
  }
  return t;
}

namespace {

std::string snapshot_name(const std::string& prefix, int step) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", step);
  return prefix + "_" + buf + ".vtk";
}

}  // namespace

RunResult run_problem(Problem& prob, const RunConfig& cfg) {
  SimState& s = prob.state;
  const int nc = s.mesh.topo.n_cells();

  MoodParams par;
  par.crit = cfg.crit;
  par.two_level = cfg.cascade == "two_level";
  CflParams cfl{cfg.cfl_v, cfg.cfl_acoustic, cfg.cfl_increase};

  RunResult res;
  res.initial = energy_totals(s);
  const double e0 = res.initial.free_energy + res.initial.kinetic;
  res.delta_h_absolute = e0 == 0.0;
  auto delta_h = [&](const EnergyTotals& t) {
    double drift = t.free_energy + t.kinetic - e0;
    return res.delta_h_absolute ? drift : drift / e0;
  };

  std::unique_ptr<DiagWriter> diag;
  if (!cfg.diag_path.empty()) {
    diag = std::make_unique<DiagWriter>(cfg.diag_path);
    diag->row(0, 0.0, 0.0, "init", res.initial, delta_h(res.initial), 0, 0, 0, nc);
  }
  if (!cfg.output_prefix.empty())
    write_vtk(snapshot_name(cfg.output_prefix, 0), s, {});

  const double t_final = prob.t_final;
  const double t_eps = 1e-12 * std::max(t_final, 1.0);
  size_t next_out = 0;
  while (next_out < prob.output_times.size() &&
         prob.output_times[next_out] <= t_eps)
    next_out++;

  double dt_prev = -1.0;
  EnergyTotals prev = res.initial;
  res.min_entropy = std::numeric_limits<double>::infinity();
  int step = 0;
  std::vector<int> node_attaches(s.mesh.topo.n_nodes, 0);
  std::vector<int> node_releases(s.mesh.topo.n_nodes, 0);
  int prev_held = 0;
  for (uint8_t v : s.stuck) prev_held += v;

  while (s.t < t_final - t_eps && step < cfg.max_steps) {
    DtChoice ch = compute_dt(s, cfl, dt_prev);
    double dt = ch.dt;
    std::string branch = ch.branch;

    double target = t_final;
    std::string target_branch = "tfinal";
    if (next_out < prob.output_times.size() &&
        prob.output_times[next_out] < target - t_eps) {
      target = prob.output_times[next_out];
      target_branch = "output";
    }
    if (s.t + dt >= target - t_eps) {
      dt = target - s.t;
      branch = target_branch;
    }

    MoodStats st;
    double used;
    try {
      used = mood_step(s, prob.bc, par, dt, &st);
    } catch (const std::exception& e) {
      throw std::runtime_error("step " + std::to_string(step + 1) + " at t=" +
                               fmt17(s.t) + ": " + e.what());
    }
    if (st.dt_clipped) branch = "contact";
    step++;
    dt_prev = used;

    EnergyTotals tot = energy_totals(s);
    if (tot.mass != prev.mass) res.mass_bitwise_constant = false;
    res.max_step_mom_drift =
        std::max({res.max_step_mom_drift, std::fabs(tot.momx - prev.momx),
                  std::fabs(tot.momy - prev.momy)});
    res.max_step_energy_drift =
        std::max(res.max_step_energy_drift, std::fabs(tot.energy - prev.energy));
    prev = tot;

    res.troubled_total += st.troubled_total;
    res.p0_total += st.n_p0;
    res.mean_troubled_fraction += static_cast<double>(st.troubled_total) / nc;
    res.min_entropy = std::min(res.min_entropy, st.min_entropy);
    res.pad_warnings += st.pad_warnings;
    bool attached = false, released = false;
    for (const auto& [node, kind] : st.events) {
      if (kind > 0) {
        attached = true;
        node_attaches[node]++;
        res.max_node_attaches = std::max(res.max_node_attaches, node_attaches[node]);
        for (int i = prob.bc.node_face_off[node]; i < prob.bc.node_face_off[node + 1];
             ++i) {
          const BcSpec& spec =
              prob.bc.by_tag[s.mesh.topo.face_tag[prob.bc.node_face[i]]];
          if (spec.kind != BcKind::contact) continue;
          res.max_attach_distance =
              std::max(res.max_attach_distance,
                       std::fabs(wall_distance(s.mesh.x[node], spec)));
          break;
        }
      } else {
        released = true;
        node_releases[node]++;
        res.max_node_releases = std::max(res.max_node_releases, node_releases[node]);
      }
    }
    res.contact_steps += attached ? 1 : 0;
    res.release_steps += released ? 1 : 0;
    int held = 0;
    for (uint8_t v : s.stuck) held += v;
    if (held > 0 && prev_held == 0) res.contact_events++;
    if (held == 0 && prev_held > 0) res.detach_events++;
    prev_held = held;

    if (diag)
      diag->row(step, s.t, used, branch, tot, delta_h(tot), st.troubled_total,
                st.n_p0, st.n_p1bj, st.n_p1);

    bool out_due = !cfg.output_prefix.empty() &&
                   ((cfg.output_every > 0 && step % cfg.output_every == 0) ||
                    (next_out < prob.output_times.size() &&
                     s.t >= prob.output_times[next_out] - t_eps));
    if (next_out < prob.output_times.size() &&
        s.t >= prob.output_times[next_out] - t_eps)
      next_out++;
    if (out_due) write_vtk(snapshot_name(cfg.output_prefix, step), s, st.level);
  }

  if (!cfg.output_prefix.empty()) write_vtk(cfg.output_prefix + "_final.vtk", s, {});

  res.steps = step;
  res.t_end = s.t;
  res.final_totals = prev;
  res.delta_h = delta_h(prev);
  if (step > 0) res.mean_troubled_fraction /= step;
  if (!std::isfinite(res.min_entropy)) res.min_entropy = 0.0;
  return res;
}

RunResult run(const RunConfig& cfg) {
  Problem prob = init_testcase(cfg);
  return run_problem(prob, cfg);
}

double l2_error(const std::vector<double>& m_cell, const std::vector<double>& numeric,
                const std::vector<double>& exact) {
  double num = 0.0, den = 0.0;
  for (size_t c = 0; c < numeric.size(); ++c) {
    double d = numeric[c] - exact[c];
    num += m_cell[c] * d * d;
    den += m_cell[c];
  }
  return std::sqrt(num / den);
}

double convergence_order(double e0, double e1, double L0, double L1) {
  return std::log(e0 / e1) / std::log(L0 / L1);
}

ConvergenceResult convergence_study(const RunConfig& base, int levels) {
  if (levels < 1) throw std::invalid_argument("convergence_study: levels must be >= 1");
  ConvergenceResult res;
  RunConfig cfg = base;
  for (int l = 0; l < levels; ++l) {
    Problem prob = init_testcase(cfg);
    if (!prob.v_exact || !prob.B_exact || !prob.T_exact)
      throw std::runtime_error("convergence_study: testcase '" + cfg.testcase +
                               "' has no exact solution");
    run_problem(prob, cfg);

    const SimState& s = prob.state;
    int nc = s.mesh.topo.n_cells();
    std::vector<double> nu(nc), eu(nc), nb(nc), eb(nc), nt(nc), et(nc);
    for (int c = 0; c < nc; ++c) {
      const auto& cell = s.mesh.topo.cells[c];
      vec2 ctr = (1.0 / 3.0) *
                 (s.mesh.x[cell[0]] + s.mesh.x[cell[1]] + s.mesh.x[cell[2]]);
      nu[c] = s.q[c].v.x;
      eu[c] = prob.v_exact(ctr, s.t).x;
      nb[c] = s.q[c].B.xx;
      eb[c] = prob.B_exact(ctr, s.t).xx;
      StressEval ev;
      double eps = s.q[c].e - 0.5 * dot(s.q[c].v, s.q[c].v);
      nt[c] = evaluate_stress(s.mat, s.q[c].B, eps, ev)
                  ? ev.T.xx
                  : std::numeric_limits<double>::quiet_NaN();
      et[c] = prob.T_exact(ctr, s.t).xx;
    }

    ConvergenceLevel lev;
    lev.nx = cfg.nx;
    lev.cells = nc;
    lev.Lc_final = s.geom.min_Lc;
    lev.err_u = l2_error(s.mass.m_cell, nu, eu);
    lev.err_bxx = l2_error(s.mass.m_cell, nb, eb);
    lev.err_txx = l2_error(s.mass.m_cell, nt, et);
    res.levels.push_back(lev);

    cfg.nx *= 2;
    cfg.ny *= 2;
  }
  for (size_t i = 0; i + 1 < res.levels.size(); ++i) {
    const auto& a = res.levels[i];
    const auto& b = res.levels[i + 1];
    res.orders.push_back(
        {convergence_order(a.err_u, b.err_u, a.Lc_final, b.Lc_final),
         convergence_order(a.err_bxx, b.err_bxx, a.Lc_final, b.Lc_final),
         convergence_order(a.err_txx, b.err_txx, a.Lc_final, b.Lc_final)});
  }
  return res;
}

}  // namespace lagfv
