#include <cmath>

#include "lagfv/driver.hpp"

namespace lagfv {

namespace {

Material config_material(const RunConfig& cfg, double rho0, double E, double nu,
                         double a = -1.0) {
  if (cfg.has_material)
    return make_material(cfg.rho0, cfg.E, cfg.nu, cfg.mat_a,
                         cfg.eos == "stiffened_gas" ? EosKind::stiffened_gas
                                                    : EosKind::neo_hookean,
                         cfg.gamma, cfg.p_inf);
  return make_material(rho0, E, nu, a);
}

RectPattern pattern_of(const RunConfig& cfg) {
  return cfg.pattern == "cross" ? RectPattern::cross : RectPattern::split;
}

// Shared state assembly: B = Id, tau = 1/rho0, e = kinetic (unloaded body);
// cell means sampled at centroids, node velocities at nodes.
SimState assemble(Mesh mesh, const Material& mat,
                  const std::function<vec2(vec2)>& v0) {
  SimState s;
  s.mesh = std::move(mesh);
  s.geom = compute_geometry(s.mesh.topo, s.mesh.x);
  s.mass = subcell_masses(s.mesh.topo, s.geom,
                          std::vector<double>(s.mesh.topo.cells.size(), mat.rho0));
  s.mat = mat;
  int nc = s.mesh.topo.n_cells();
  s.q.assign(nc, CellState{});
  for (int c = 0; c < nc; ++c) {
    const auto& cell = s.mesh.topo.cells[c];
    vec2 ctr = (1.0 / 3.0) *
               (s.mesh.x[cell[0]] + s.mesh.x[cell[1]] + s.mesh.x[cell[2]]);
    CellState& q = s.q[c];
    q.tau = 1.0 / mat.rho0;
    q.v = v0(ctr);
    q.e = 0.5 * dot(q.v, q.v);
    q.B = sym3_identity();
  }
  s.v_node.resize(s.mesh.topo.n_nodes);
  for (int p = 0; p < s.mesh.topo.n_nodes; ++p) s.v_node[p] = v0(s.mesh.x[p]);
  s.stuck.assign(s.mesh.topo.n_nodes, 0);
  s.t = 0.0;
  return s;
}

Problem swinging_plate(const RunConfig& cfg) {
  Material mat = config_material(cfg, 1100.0, 1.7e7, 0.45);
  const double u0 = 5e-4;
  const double omega = 0.5 * M_PI * std::sqrt(2.0 * mat.mu / mat.rho0);
  const double ho = 0.5 * M_PI;

  // Divergence-free mode shape; its gradient is symmetric and trace free.
  auto shape = [ho](vec2 x) -> vec2 {
    return {-std::sin(ho * x.x) * std::cos(ho * x.y),
            std::cos(ho * x.x) * std::sin(ho * x.y)};
  };
  auto shape_grad = [ho](vec2 x) -> mat2 {
    double sx = std::sin(ho * x.x), cx = std::cos(ho * x.x);
    double sy = std::sin(ho * x.y), cy = std::cos(ho * x.y);
    return {-ho * cx * cy, ho * sx * sy, -ho * sx * sy, ho * cx * cy};
  };
  auto v_exact = [=](vec2 x, double t) -> vec2 {
    return (omega * u0 * std::cos(omega * t)) * shape(x);
  };
  auto B_exact = [=](vec2 x, double t) -> sym3 {
    mat2 g = shape_grad(x);
    double s = u0 * std::sin(omega * t);
    mat3 F = mat3_identity() + s * embed(g);
    mat3 b = F * transpose(F);
    return {b.a[0][0], b.a[1][1], b.a[2][2], b.a[0][1], b.a[0][2], b.a[1][2]};
  };
  auto T_exact = [=](vec2 x, double t) -> sym3 {
    return cauchy_stress(strain_state(B_exact(x, t)), mat, 0.0);
  };

  Problem prob;
  prob.state = assemble(make_rect_mesh(cfg.nx, cfg.ny, 0.0, 0.0, 2.0, 2.0,
                                       pattern_of(cfg)),
                        mat, [&](vec2 x) { return v_exact(x, 0.0); });
  BcSpec nv;
  nv.kind = BcKind::normal_velocity;
  nv.v_fn = v_exact;
  prob.bc = build_bc_table(prob.state.mesh.topo, {{1, nv}, {2, nv}, {3, nv}, {4, nv}});
  prob.t_final = M_PI / omega;
  prob.v_exact = v_exact;
  prob.B_exact = B_exact;
  prob.T_exact = T_exact;
  return prob;
}

Problem beryllium_plate(const RunConfig& cfg) {
  Material mat = config_material(cfg, 1845.0, 3.1827e11, 0.0539);
  const double L = 0.06;
  const double alpha = 78.834, A = 4.3369e-5, omega = 2.3597e5;
  const double a1 = 56.6368, a2 = 57.6455;
  auto v0 = [=](vec2 x) -> vec2 {
    double xp = alpha * (x.x + 0.5 * L);
    double vy = A * omega *
                (a1 * (std::sinh(xp) + std::sin(xp)) -
                 a2 * (std::cosh(xp) + std::cos(xp)));
    return {0.0, vy};
  };
  Problem prob;
  prob.state = assemble(make_rect_mesh(cfg.nx, cfg.ny, -0.03, -0.005, 0.03, 0.005,
                                       pattern_of(cfg)),
                        mat, v0);
  prob.bc = build_bc_table(prob.state.mesh.topo, {});  // free everywhere
  prob.t_final = 3e-5;
  return prob;
}

Problem cantilever_beam(const RunConfig& cfg) {
  Material mat = config_material(cfg, 1100.0, 1.7e7, 0.45);
  vec2 v0 = cfg.has_v0 ? cfg.v0 : vec2{10.0, 0.0};
  Problem prob;
  prob.state = assemble(make_rect_mesh(cfg.nx, cfg.ny, 0.0, 0.0, 1.0, 6.0,
                                       pattern_of(cfg)),
                        mat, [&](vec2) { return v0; });
  // The clamped base does not move; its nodes carry no initial velocity.
  for (int p = 0; p < prob.state.mesh.topo.n_nodes; ++p)
    if (prob.state.mesh.x[p].y == 0.0) prob.state.v_node[p] = {0.0, 0.0};
  BcSpec fix;
  fix.kind = BcKind::fixed;
  prob.bc = build_bc_table(prob.state.mesh.topo, {{3, fix}});
  prob.t_final = 1.5;
  prob.output_times = {0.375, 0.75, 1.125, 1.5};
  return prob;
}

Problem uniform_block(const RunConfig& cfg) {
  Material mat = config_material(cfg, 1000.0, 1e7, 0.3);
  vec2 v0 = cfg.has_v0 ? cfg.v0 : vec2{0.1, 0.05};
  Problem prob;
  prob.state = assemble(make_rect_mesh(cfg.nx, cfg.ny, 0.0, 0.0, 1.0, 1.0,
                                       pattern_of(cfg)),
                        mat, [&](vec2) { return v0; });
  BcSpec vel;
  vel.kind = BcKind::velocity;
  vel.v_bc = v0;
  prob.bc = build_bc_table(prob.state.mesh.topo,
                           {{1, vel}, {2, vel}, {3, vel}, {4, vel}});
  prob.t_final = 1.0;
  return prob;
}

Problem contact_drop(const RunConfig& cfg) {
  Material mat = config_material(cfg, 8930.0, 5.85e8, 0.45);
  vec2 v0 = cfg.has_v0 ? cfg.v0 : vec2{0.0, -100.0};
  const double gap = 0.002, side = 0.01;
  Problem prob;
  prob.state = assemble(make_rect_mesh(cfg.nx, cfg.ny, 0.0, gap, side, gap + side,
                                       pattern_of(cfg)),
                        mat, [&](vec2) { return v0; });
  BcSpec con;
  con.kind = BcKind::contact;
  con.wall_n = {0.0, 1.0};
  con.wall_b = 0.0;
  con.eps_d = 1e-12;
  prob.bc = build_bc_table(prob.state.mesh.topo, {{3, con}});
  prob.t_final = 2e-4;
  return prob;
}

Problem custom(const RunConfig& cfg) {
  if (cfg.mesh_path.empty())
    throw config_error("custom testcase requires a mesh path");
  if (!cfg.has_material)
    throw config_error("custom testcase requires a [material] block");
  Material mat = config_material(cfg, 0, 0, 0);
  vec2 v0 = cfg.v0;
  Mesh mesh = cfg.mesh_path.size() > 4 &&
                      cfg.mesh_path.substr(cfg.mesh_path.size() - 4) == ".msh"
                  ? read_msh_v2(cfg.mesh_path)
                  : read_mesh(cfg.mesh_path);
  Problem prob;
  prob.state = assemble(std::move(mesh), mat, [&](vec2) { return v0; });
  prob.bc = build_bc_table(prob.state.mesh.topo, cfg.bcs);
  prob.t_final = cfg.t_final > 0.0 ? cfg.t_final : 0.0;
  return prob;
}

}  // namespace

Problem init_testcase(const RunConfig& cfg) {
  Problem prob;
  if (cfg.testcase == "swinging_plate")
    prob = swinging_plate(cfg);
  else if (cfg.testcase == "beryllium_plate")
    prob = beryllium_plate(cfg);
  else if (cfg.testcase == "cantilever_beam")
    prob = cantilever_beam(cfg);
  else if (cfg.testcase == "uniform_block")
    prob = uniform_block(cfg);
  else if (cfg.testcase == "contact_drop")
    prob = contact_drop(cfg);
  else if (cfg.testcase == "custom")
    prob = custom(cfg);
  else
    throw config_error("unknown testcase '" + cfg.testcase + "'");
  if (cfg.t_final >= 0.0) prob.t_final = cfg.t_final;
  return prob;
}

}  // namespace lagfv
