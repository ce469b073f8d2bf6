#ifndef LAGFV_DRIVER_HPP
#define LAGFV_DRIVER_HPP

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lagfv/mood.hpp"

namespace lagfv {

struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Run configuration parsed from the plain-text format:
//
//   # solverconfig v1
//   key = value            # top-level keys
//   [material]             # material block
//   rho0 = 1100
//   [bc 3]                 # boundary block for face tag 3
//   kind = fixed
//
// Comments start with '#', blank lines are skipped, unknown keys raise.
struct RunConfig {
  // problem selection
  std::string testcase = "uniform_block";  // swinging_plate, beryllium_plate,
                                           // cantilever_beam, uniform_block,
                                           // contact_drop, custom
  std::string mesh_path;                   // required for testcase = custom
  int nx = 16, ny = 16;                    // structured resolution otherwise
  std::string pattern = "split";           // split | cross
  double t_final = -1.0;                   // < 0: test-case default
  int max_steps = 100000000;
  vec2 v0{0.0, 0.0};                       // uniform_block initial velocity
  bool has_v0 = false;

  // time-step control
  double cfl_v = 0.2;
  double cfl_acoustic = 0.4;
  double cfl_increase = 0.1;

  // limiting
  std::string cascade = "three_level";     // three_level | two_level
  DetectionCriteria crit;

  // artifacts (empty path disables)
  std::string diag_path;
  std::string output_prefix;
  int output_every = 0;                    // snapshot every k steps, 0 = none

  // material block; required for custom, overrides test-case defaults otherwise
  bool has_material = false;
  double rho0 = 0.0, E = 0.0, nu = 0.0, mat_a = -1.0;
  std::string eos = "neo_hookean";
  double gamma = 0.0, p_inf = 0.0;

  // boundary blocks for custom runs ([bc <tag>] sections)
  std::vector<std::pair<int, BcSpec>> bcs;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Fully initialized problem: state at t = 0, boundary wiring, final time and
// (when the case has one) the exact solution for error measurement.
struct Problem {
  SimState state;
  BcTable bc;
  double t_final = 0.0;
  std::vector<double> output_times;  // forced snapshot instants
  std::function<vec2(vec2, double)> v_exact;
  std::function<sym3(vec2, double)> B_exact;
  std::function<sym3(vec2, double)> T_exact;
};

Problem init_testcase(const RunConfig& cfg);

// Three-branch step control: volume growth C_v min(V/|V-dot|) with
// V-dot = sum_p cnr_p . v_p from current node velocities, acoustic
// C_CFL min(L_c/a_c), and the growth cap (1+C_i) dt_prev (inactive on the
// first step, dt_prev <= 0).
struct CflParams {
  double c_v = 0.2;
  double c_cfl = 0.4;
  double c_i = 0.1;
};

struct DtChoice {
  double dt = 0.0;
  const char* branch = "";  // volume | acoustic | increase
};

DtChoice compute_dt(const SimState& s, const CflParams& cfl, double dt_prev);

// Mass-weighted whole-body sums; free_energy integrates the stored energy
// per unit mass of the constitutive law.
struct EnergyTotals {
  double mass = 0.0;
  double momx = 0.0, momy = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double free_energy = 0.0;
};

EnergyTotals energy_totals(const SimState& s);

struct RunResult {
  int steps = 0;
  double t_end = 0.0;
  EnergyTotals initial, final_totals;
  double delta_h = 0.0;            // (Psi + k - E0)/E0, absolute drift if E0 = 0
  bool delta_h_absolute = false;
  long long troubled_total = 0;
  long long p0_total = 0;          // parachute-updated cells summed over steps
  double mean_troubled_fraction = 0.0;
  double min_entropy = 0.0;
  int pad_warnings = 0;
  int contact_steps = 0;           // steps with at least one attach event
  int release_steps = 0;           // steps with at least one release event
  int contact_events = 0;          // transitions: no node held -> some node held
  int detach_events = 0;           // transitions: some node held -> none held
  int max_node_attaches = 0;       // worst per-node attach count (chatter check)
  int max_node_releases = 0;       // worst per-node release count (chatter check)
  double max_attach_distance = 0.0;  // wall distance at attach instants
  bool mass_bitwise_constant = true;
  double max_step_mom_drift = 0.0;     // max |P^{n+1} - P^n| componentwise
  double max_step_energy_drift = 0.0;  // max |E^{n+1} - E^n|
};

// Advances the problem to t_final writing diagnostics/snapshots per config.
RunResult run_problem(Problem& prob, const RunConfig& cfg);
RunResult run(const RunConfig& cfg);

// Mass-weighted root-mean-square error sqrt(sum m_c d_c^2 / sum m_c).
double l2_error(const std::vector<double>& m_cell, const std::vector<double>& numeric,
                const std::vector<double>& exact);

// order = log(e0/e1) / log(L0/L1)
double convergence_order(double e0, double e1, double L0, double L1);

// Repeated runs of a convergence test case at doubling resolution; errors of
// horizontal velocity, B_xx and T_xx against the exact fields at t_final.
struct ConvergenceLevel {
  int nx = 0;
  int cells = 0;
  double Lc_final = 0.0;
  double err_u = 0.0, err_bxx = 0.0, err_txx = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  // orders[i] between level i and i+1 for (u, Bxx, Txx)
  std::vector<std::array<double, 3>> orders;
};

ConvergenceResult convergence_study(const RunConfig& base, int levels);

}  // namespace lagfv

#endif
