#ifndef LAGFV_MOOD_HPP
#define LAGFV_MOOD_HPP

#include <utility>
#include <vector>

#include "lagfv/constitutive.hpp"
#include "lagfv/mesh.hpp"
#include "lagfv/solver.hpp"
#include "lagfv/state.hpp"

namespace lagfv {

// Admissibility and oscillation detection applied to candidate updates.
struct DetectionCriteria {
  double delta0 = 1e-4;  // density relaxation floor, relative to rho0
  double delta1 = 1e-3;  // density relaxation fraction of the local spread
  // Reference energy scale for the internal-energy check; the stepper sets
  // this to the largest cell energy of the state being advanced.
  double eps_scale = 0.0;
  // The internal energy is the difference e - kin of two near-cancelling
  // totals, so its discrete noise is a sizable fraction of the local energy
  // scale even in healthy runs; only an excursion beyond eps_rel times that
  // scale marks a genuinely diverging state rather than bookkeeping noise.
  double eps_rel = 10.0;
  // Treat a strain/volume inconsistency beyond Lc^3 as a detection (it is
  // always monitored and reported either way). Off by default: the gap grows
  // like accumulated O(dt^2) truncation and is not an oscillation indicator.
  bool check_involution = false;
};

enum class DetectReason {
  accept,
  not_finite,
  negative_tau,
  negative_eps,
  not_spd,
  rdmp,
  involution
};

// Tests one candidate cell; rho_new is the geometric density m/V at t^{n+1},
// Lc_new the in-circle diameter at t^{n+1}, and [rho_min_n, rho_max_n] the
// density range over the cell and its face neighbors at t^n.
DetectReason detect_cell(const CellState& cand, double rho_new, double Lc_new, double rho0,
                         double rho_min_n, double rho_max_n, const DetectionCriteria& crit);

struct SchemeLevelMap {
  std::vector<int> level;  // CellLevel per cell
};

// Drops each troubled cell one rung (or straight to the parachute when
// two_level) and returns the sorted unique recompute set: the troubled cells
// plus their face neighbors.
std::vector<int> decrement(SchemeLevelMap& map, const std::vector<int>& troubled,
                           const MeshTopology& topo, bool two_level);

// Persistent simulation state advanced step by step.
struct SimState {
  Mesh mesh;  // topo + node positions at t^n
  MeshGeometry geom;
  MassPartition mass;
  Material mat;
  std::vector<CellState> q;
  std::vector<vec2> v_node;    // node velocities at t^n (strain-rate history)
  std::vector<uint8_t> stuck;  // contact state per node
  double t = 0.0;
};

struct MoodParams {
  DetectionCriteria crit;
  bool two_level = false;  // cascade without the limited middle scheme
};

struct MoodStats {
  int mood_iters = 0;
  int troubled_total = 0;
  int n_p0 = 0, n_p1bj = 0, n_p1 = 0;
  int predictor_fallbacks = 0;
  int cn_fallbacks = 0;
  int dropped_constraints = 0;
  int pad_warnings = 0;  // parachute cells accepted outside the admissible set
  // Oscillation re-detections waived because the cell already spent its
  // limited recompute this step (see the once-per-step rule in mood_step).
  int soft_waived = 0;
  double min_entropy = 0.0;
  double dt_used = 0.0;
  bool dt_clipped = false;
  std::vector<std::pair<int, int>> events;  // (node, +1 contact / -1 release)
  std::vector<int> level;                   // final per-cell scheme level
  int reason_counts[7] = {0, 0, 0, 0, 0, 0, 0};  // detections per DetectReason
  // Strain/volume consistency monitor over the accepted states: cells where
  // |sqrt(det B) - rho0/rho| exceeds Lc^3, and the largest such gap.
  int involution_violations = 0;
  double max_involution_gap = 0.0;
};

// One full step: predict, solve nodes, correct, detect, and recompute
// troubled cells down the cascade. Validity failures (non-finite state, loss
// of positivity or definiteness) iterate down to the parachute; oscillation
// flags (density bounds, involution gap) buy each cell one limited recompute
// per step, which is then accepted. Applies contact transitions and lands
// exactly on the wall by clipping dt when needed. Returns the dt used.
double mood_step(SimState& s, const BcTable& bc, const MoodParams& par, double dt,
                 MoodStats* stats = nullptr);

}  // namespace lagfv

#endif
