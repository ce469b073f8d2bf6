#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lagfv/driver.hpp"
#include "lagfv/output.hpp"

using namespace lagfv;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

TEST_CASE("config parser reads sections, comments and values") {
  std::string text =
      "# solverconfig v1\n"
      "testcase = cantilever_beam   # trailing comment\n"
      "nx = 8\n"
      "ny = 48\n"
      "t_final = 0.75\n"
      "cascade = two_level\n"
      "cfl_acoustic = 0.3\n"
      "check_involution = false\n"
      "diag = out.csv\n"
      "\n"
      "[material]\n"
      "rho0 = 1200\n"
      "E = 2e7\n"
      "nu = 0.4\n"
      "\n"
      "[bc 3]\n"
      "kind = contact\n"
      "wall_ny = 1\n"
      "wall_b = -0.25\n";
  RunConfig cfg = parse_config(text);
  CHECK(cfg.testcase == "cantilever_beam");
  CHECK(cfg.nx == 8);
  CHECK(cfg.ny == 48);
  CHECK(cfg.t_final == 0.75);
  CHECK(cfg.cascade == "two_level");
  CHECK(cfg.cfl_acoustic == 0.3);
  CHECK(cfg.crit.check_involution == false);
  CHECK(cfg.diag_path == "out.csv");
  CHECK(cfg.has_material);
  CHECK(cfg.rho0 == 1200);
  CHECK(cfg.E == 2e7);
  REQUIRE(cfg.bcs.size() == 1);
  CHECK(cfg.bcs[0].first == 3);
  CHECK(cfg.bcs[0].second.kind == BcKind::contact);
  CHECK(cfg.bcs[0].second.wall_b == -0.25);
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS(parse_config("nx = 4\n"), config_error);  // missing header
  CHECK_THROWS_AS(parse_config(""), config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\nbogus_key = 1\n"), config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\nnx = four\n"), config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\n[weird]\n"), config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\nnx 4\n"), config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\n[bc 1]\nkind = slippery\n"),
                  config_error);
  CHECK_THROWS_AS(parse_config("# solverconfig v1\ncascade = maybe\n"), config_error);
}

TEST_CASE("acoustic branch controls the step for a resting body") {
  // mu = E/(2(1+nu)) = 3e7, c_v^2 = mu/rho0, a^2 = (1 + 4/3) mu/rho0 = 10^4.
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 4;
  cfg.has_v0 = true;
  cfg.v0 = {0.0, 0.0};
  cfg.has_material = true;
  cfg.rho0 = 7000;
  cfg.E = 7.5e7;
  cfg.nu = 0.25;
  Problem prob = init_testcase(cfg);
  CflParams cfl;

  DtChoice ch = compute_dt(prob.state, cfl, -1.0);
  CHECK(ch.branch == std::string("acoustic"));
  CHECK(ch.dt == doctest::Approx(0.4 * prob.state.geom.min_Lc / 100.0).epsilon(1e-12));

  // A small previous step activates the growth cap.
  DtChoice ch2 = compute_dt(prob.state, cfl, 0.25 * ch.dt);
  CHECK(ch2.branch == std::string("increase"));
  CHECK(ch2.dt == doctest::Approx(1.1 * 0.25 * ch.dt).epsilon(1e-12));
}

TEST_CASE("fast expansion activates the volume branch") {
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 4;
  cfg.has_v0 = true;
  cfg.v0 = {0.0, 0.0};
  cfg.has_material = true;
  cfg.rho0 = 7000;
  cfg.E = 7.5e7;
  cfg.nu = 0.25;
  Problem prob = init_testcase(cfg);
  // v = rate (x - x0): volume rate tr(grad v) = 2 rate per unit volume.
  double rate = 1000.0;
  for (int p = 0; p < prob.state.mesh.topo.n_nodes; ++p)
    prob.state.v_node[p] = rate * (prob.state.mesh.x[p] - vec2{0.5, 0.5});
  DtChoice ch = compute_dt(prob.state, CflParams{}, -1.0);
  CHECK(ch.branch == std::string("volume"));
  CHECK(ch.dt == doctest::Approx(0.2 / (2.0 * rate)).epsilon(1e-9));
}

TEST_CASE("whole-body sums of an unloaded uniform block") {
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 3;
  cfg.has_v0 = true;
  cfg.v0 = {0.3, -0.4};
  Problem prob = init_testcase(cfg);
  EnergyTotals t = energy_totals(prob.state);
  CHECK(t.mass == doctest::Approx(1000.0).epsilon(1e-13));
  CHECK(t.momx == doctest::Approx(300.0).epsilon(1e-13));
  CHECK(t.momy == doctest::Approx(-400.0).epsilon(1e-13));
  CHECK(t.kinetic == doctest::Approx(125.0).epsilon(1e-13));
  CHECK(t.energy == doctest::Approx(125.0).epsilon(1e-13));
  CHECK(std::fabs(t.free_energy) < 1e-12);
}

TEST_CASE("swinging plate wiring matches its closed-form data") {
  RunConfig cfg;
  cfg.testcase = "swinging_plate";
  cfg.nx = cfg.ny = 4;
  Problem prob = init_testcase(cfg);

  // omega = pi/2 sqrt(2 mu / rho0) with mu = 1.7e7 / 2.9, rho0 = 1100.
  double omega = M_PI / prob.t_final;
  CHECK(omega == doctest::Approx(162.16756438040238).epsilon(1e-12));
  CHECK(prob.t_final == doctest::Approx(0.019372509327577028).epsilon(1e-12));

  // Mode shape at (0.5, 1.5) is (1/2, 1/2).
  REQUIRE(bool(prob.v_exact));
  vec2 v = prob.v_exact({0.5, 1.5}, 0.0);
  CHECK(v.x == doctest::Approx(0.5 * omega * 5e-4).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(0.5 * omega * 5e-4).epsilon(1e-12));

  // Unloaded start: B = Id, T = 0 bitwise.
  sym3 B0 = prob.B_exact({0.7, 1.1}, 0.0);
  CHECK(B0.xx == 1.0);
  CHECK(B0.xy == 0.0);
  CHECK(B0.zz == 1.0);
  sym3 T0 = prob.T_exact({0.7, 1.1}, 0.0);
  CHECK(T0.xx == 0.0);
  CHECK(T0.xy == 0.0);

  for (int tag = 1; tag <= 4; ++tag) {
    CHECK(prob.bc.by_tag[tag].kind == BcKind::normal_velocity);
    CHECK(bool(prob.bc.by_tag[tag].v_fn));
  }

  // Node velocities sample the t = 0 field.
  int corner = -1;
  for (int p = 0; p < prob.state.mesh.topo.n_nodes; ++p)
    if (prob.state.mesh.x[p].x == 0.5 && prob.state.mesh.x[p].y == 1.5) corner = p;
  REQUIRE(corner >= 0);
  CHECK(prob.state.v_node[corner].x == doctest::Approx(v.x).epsilon(1e-14));
}

TEST_CASE("beryllium plate initial profile and free boundaries") {
  RunConfig cfg;
  cfg.testcase = "beryllium_plate";
  cfg.nx = 12;
  cfg.ny = 2;
  Problem prob = init_testcase(cfg);
  CHECK(prob.t_final == 3e-5);
  CHECK(prob.state.mat.rho0 == 1845.0);

  // Left end x' = 0: v = A omega (a1 (0+0) - a2 (1+1)) = -2 a2 A omega.
  int left = -1;
  for (int p = 0; p < prob.state.mesh.topo.n_nodes; ++p)
    if (prob.state.mesh.x[p].x == -0.03 && prob.state.mesh.x[p].y == -0.005) left = p;
  REQUIRE(left >= 0);
  CHECK(prob.state.v_node[left].x == 0.0);
  CHECK(prob.state.v_node[left].y == doctest::Approx(-1179.86306778263).epsilon(1e-12));

  for (int tag = 1; tag <= 4; ++tag)
    CHECK(prob.bc.by_tag[tag].kind == BcKind::free_traction);
}

TEST_CASE("cantilever beam clamps the base and schedules snapshots") {
  RunConfig cfg;
  cfg.testcase = "cantilever_beam";
  cfg.nx = 2;
  cfg.ny = 12;
  Problem prob = init_testcase(cfg);
  CHECK(prob.t_final == 1.5);
  REQUIRE(prob.output_times.size() == 4);
  CHECK(prob.output_times[0] == 0.375);
  CHECK(prob.output_times[3] == 1.5);
  CHECK(prob.bc.by_tag[3].kind == BcKind::fixed);
  for (auto& q : prob.state.q) {
    CHECK(q.v.x == 10.0);
    CHECK(q.v.y == 0.0);
  }
  for (int p = 0; p < prob.state.mesh.topo.n_nodes; ++p) {
    if (prob.state.mesh.x[p].y == 0.0)
      CHECK(prob.state.v_node[p].x == 0.0);
    else
      CHECK(prob.state.v_node[p].x == 10.0);
  }
}

TEST_CASE("formatted doubles round-trip bitwise") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, M_PI, 0.0}) {
    std::string s = fmt17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("error norm and order arithmetic") {
  CHECK(l2_error({1.0, 3.0}, {2.0, 0.0}, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(convergence_order(4e-3, 1e-3, 2.0, 1.0) == doctest::Approx(2.0));
  CHECK(convergence_order(4e-3, 1e-3, 0.2, 0.1) == doctest::Approx(2.0));
}

TEST_CASE("diagnostics header is stable") {
  CHECK(std::string(DiagWriter::header()) ==
        "step,time,dt,branch,mass,momx,momy,energy,kinetic,free,delta_h,troubled,"
        "levelP0,levelP1BJ,levelP1");
}

TEST_CASE("snapshot writer emits a well-formed legacy grid file") {
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 1;
  Problem prob = init_testcase(cfg);
  std::string path = "test_tmp_snapshot.vtk";
  write_vtk(path, prob.state, {kP0, kP1});
  std::string text = slurp(path);
  std::remove(path.c_str());
  CHECK(text.rfind("# vtk DataFile Version 2.0\n", 0) == 0);
  CHECK(text.find("DATASET UNSTRUCTURED_GRID\n") != std::string::npos);
  CHECK(text.find("POINTS 4 double\n") != std::string::npos);
  CHECK(text.find("CELLS 2 8\n") != std::string::npos);
  CHECK(text.find("CELL_TYPES 2\n") != std::string::npos);
  CHECK(text.find("CELL_DATA 2\n") != std::string::npos);
  CHECK(text.find("SCALARS rho double 1\n") != std::string::npos);
  CHECK(text.find("SCALARS p double 1\n") != std::string::npos);
  CHECK(text.find("SCALARS level int 1\n") != std::string::npos);
  CHECK(text.find("POINT_DATA 4\n") != std::string::npos);
  CHECK(text.find("VECTORS velocity double\n") != std::string::npos);
  // density of the unloaded block
  CHECK(text.find("\n1000\n") != std::string::npos);
}

TEST_CASE("zero-length run writes the initial snapshot only") {
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 2;
  cfg.t_final = 0.0;
  cfg.output_prefix = "test_tmp_zero";
  RunResult res = run(cfg);
  CHECK(res.steps == 0);
  CHECK(res.delta_h == 0.0);
  CHECK(res.t_end == 0.0);
  std::ifstream first("test_tmp_zero_000000.vtk");
  CHECK(bool(first));
  std::ifstream last("test_tmp_zero_final.vtk");
  CHECK(bool(last));
  std::remove("test_tmp_zero_000000.vtk");
  std::remove("test_tmp_zero_final.vtk");
}

TEST_CASE("uniform block run preserves the state and its diagnostics") {
  RunConfig cfg;
  cfg.testcase = "uniform_block";
  cfg.nx = cfg.ny = 3;
  cfg.has_v0 = true;
  cfg.v0 = {0.1, 0.05};
  cfg.t_final = 10.0;
  cfg.max_steps = 20;
  cfg.diag_path = "test_tmp_uniform.csv";
  RunResult res = run(cfg);
  CHECK(res.steps == 20);
  CHECK(res.mass_bitwise_constant);
  CHECK(res.max_step_mom_drift <= 1e-9);
  CHECK(res.max_step_energy_drift <= 1e-9);
  CHECK(res.min_entropy >= -1e-14);
  CHECK(res.troubled_total == 0);
  CHECK(std::fabs(res.delta_h) <= 1e-12);

  std::string text = slurp("test_tmp_uniform.csv");
  std::remove("test_tmp_uniform.csv");
  auto lines = split(text, '\n');
  REQUIRE(lines.size() >= 22);  // header + step 0 + 20 steps
  CHECK(lines[0] == DiagWriter::header());
  auto row0 = split(lines[1], ',');
  auto rowN = split(lines[21], ',');
  REQUIRE(row0.size() == 15);
  REQUIRE(rowN.size() == 15);
  CHECK(row0[0] == "0");
  CHECK(rowN[0] == "20");
  CHECK(row0[3] == "init");
  CHECK(rowN[3] == "acoustic");
  CHECK(row0[4] == rowN[4]);  // mass column bitwise constant
  CHECK(rowN[12] == "0");     // no parachute cells
  CHECK(rowN[14] == "18");    // all cells at the top scheme
}

TEST_CASE("runs are reproducible byte for byte") {
  RunConfig cfg;
  cfg.testcase = "swinging_plate";
  cfg.nx = cfg.ny = 4;
  cfg.max_steps = 5;
  cfg.diag_path = "test_tmp_repro_a.csv";
  run(cfg);
  cfg.diag_path = "test_tmp_repro_b.csv";
  run(cfg);
  std::string a = slurp("test_tmp_repro_a.csv");
  std::string b = slurp("test_tmp_repro_b.csv");
  std::remove("test_tmp_repro_a.csv");
  std::remove("test_tmp_repro_b.csv");
  CHECK(a == b);
  CHECK(a.size() > 100);
}

TEST_CASE("dropped block bounces: one landing step, one release step") {
  RunConfig cfg;
  cfg.testcase = "contact_drop";
  cfg.nx = cfg.ny = 4;
  cfg.pattern = "cross";
  RunResult res = run(cfg);
  // The whole bottom face lands in one clipped step, the body leaves the wall
  // once, and no node ever chatters (re-attaches or re-releases).
  CHECK(res.contact_steps == 1);
  CHECK(res.contact_events == 1);
  CHECK(res.detach_events == 1);
  CHECK(res.max_node_attaches == 1);
  CHECK(res.max_node_releases == 1);
  CHECK(res.max_attach_distance <= 1e-12);
  CHECK(res.initial.momy < 0.0);
  CHECK(res.final_totals.momy > 0.0);  // the bounce reversed the momentum
  CHECK(res.mass_bitwise_constant);
  CHECK(res.min_entropy >= -1e-14);
}

TEST_CASE("forced snapshot instants are hit exactly") {
  RunConfig cfg;
  cfg.testcase = "cantilever_beam";
  cfg.nx = 2;
  cfg.ny = 12;
  cfg.t_final = 0.02;
  cfg.diag_path = "test_tmp_cant.csv";
  Problem prob = init_testcase(cfg);
  prob.output_times = {0.01};
  RunResult res = run_problem(prob, cfg);
  CHECK(res.t_end == doctest::Approx(0.02).epsilon(1e-12));
  std::string text = slurp("test_tmp_cant.csv");
  std::remove("test_tmp_cant.csv");
  bool hit = false;
  for (auto& line : split(text, '\n')) {
    auto cols = split(line, ',');
    if (cols.size() > 3 && cols[3] == "output") {
      hit = true;
      CHECK(std::strtod(cols[1].c_str(), nullptr) == doctest::Approx(0.01).epsilon(1e-12));
    }
  }
  CHECK(hit);
}
