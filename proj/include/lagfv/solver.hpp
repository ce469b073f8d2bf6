#ifndef LAGFV_SOLVER_HPP
#define LAGFV_SOLVER_HPP

#include <functional>
#include <utility>
#include <vector>

#include "lagfv/constitutive.hpp"
#include "lagfv/mesh.hpp"
#include "lagfv/state.hpp"

namespace lagfv {

// Boundary conditions, all imposed through the nodal solver. Constraint
// kinds restrict the node velocity; traction kinds add boundary forces.
enum class BcKind {
  free_traction,
  traction,         // prescribed exterior stress -pressure * Id
  normal_velocity,  // v_p . n = given
  velocity,         // full vector prescribed
  symmetry,         // v_p . n = 0
  fixed,            // v_p = 0
  contact           // evolving free <-> wall state per node
};

// Application hierarchy, lower rank first: wall/fixed (1), space-dependent
// velocity or pressure data (2), symmetry (3), free traction (4).
int bc_rank(BcKind kind);

struct BcSpec {
  BcKind kind = BcKind::free_traction;
  double pressure = 0.0;  // traction: T_bc = -pressure * Id
  vec2 v_bc{0.0, 0.0};
  // space-time velocity data evaluated at (node position, t*); overrides v_bc
  std::function<vec2(vec2, double)> v_fn;
  vec2 wall_n{0.0, 1.0};  // contact wall: unit normal pointing into the body
  double wall_b = 0.0;    // wall plane n . x = b
  double eps_d = 1e-12;   // contact distance threshold
};

struct BcTable {
  std::vector<BcSpec> by_tag;  // dense, indexed by face tag
  std::vector<int> node_face_off;  // CSR: node -> incident boundary faces
  std::vector<int> node_face;
};

// specs: (face tag, spec) pairs. Tags present in the mesh but not listed
// default to free traction.
BcTable build_bc_table(const MeshTopology& topo,
                       const std::vector<std::pair<int, BcSpec>>& specs);

// Impedance part of the corner interaction: z * sum of (|f|/2) n̂⊗n̂ over the
// given half-face vectors (|f|/2 * n̂ each).
mat2 impedance_matrix(const std::array<vec2, 2>& half_faces, double z);

// M_cp for local corner `local` of triangle (a, b, c).
mat2 subcell_matrix(vec2 a, vec2 b, vec2 c, int local, double z);

struct NodeSolveStats {
  int dropped_constraints = 0;
  int constrained_nodes = 0;
};

// Resolves node velocities from corner-extrapolated cell data (3 entries
// per cell in v_cp / T_cp) and per-cell impedances, applying boundary
// conditions in hierarchy order. stuck[p] != 0 activates the contact wall
// constraint at node p. nodes == nullptr solves every node; otherwise only
// the listed ones are updated in v_p. t_star feeds space-time BC data.
void solve_nodes(const MeshTopology& topo, const std::vector<vec2>& x,
                 const std::vector<vec2>& v_cp, const std::vector<sym3>& T_cp,
                 const std::vector<double>& z_cell, const BcTable& bc,
                 const std::vector<uint8_t>& stuck, double t_star,
                 const std::vector<int>* nodes, std::vector<vec2>& v_p,
                 NodeSolveStats* stats = nullptr);

// Same assembly restricted to one node with the wall constraint skipped;
// used by the contact release test.
vec2 solve_node_unconstrained(const MeshTopology& topo, const std::vector<vec2>& x,
                              const std::vector<vec2>& v_cp,
                              const std::vector<sym3>& T_cp,
                              const std::vector<double>& z_cell, const BcTable& bc,
                              double t_star, int node);

// Contact kinematics against the wall plane n.x = b approached from the
// n.x - b > 0 side.
double wall_distance(vec2 x, const BcSpec& contact);
// Time for a node at x moving at v to land on the wall; +inf when receding
// or moving parallel.
double wall_landing_time(vec2 x, vec2 v, const BcSpec& contact);

// f_cp = T_cp cnr + M_cp (v_p - v_cp) on the frozen t^n corner vector.
vec2 subcell_force(const mat2& M_cp, const sym3& T_cp, vec2 cnr, vec2 v_p, vec2 v_cp);

// Conservative update of (tau, v, e) for the listed cells plus the per-cell
// entropy production sum_p M_cp (v_p - v_cp) . (v_p - v_cp).
struct CorrectorIn {
  const MeshTopology* topo = nullptr;
  const MeshGeometry* geom_n = nullptr;        // t^n corner vectors
  const std::vector<vec2>* x_n = nullptr;      // t^n coordinates
  const std::vector<double>* m_cell = nullptr;
  const std::vector<CellState>* q_n = nullptr;
  const std::vector<vec2>* v_cp = nullptr;     // 3 per cell, t* corner velocity
  const std::vector<sym3>* T_cp = nullptr;     // 3 per cell, t* corner stress
  const std::vector<double>* z_cell = nullptr; // t* impedance
  const std::vector<vec2>* v_p = nullptr;      // resolved node velocities
  double dt = 0.0;
};
void correct_cells(const CorrectorIn& in, const std::vector<int>& cells,
                   std::vector<CellState>& q_out, std::vector<double>& entropy);

// x^{n+1} = x^n + dt v_p
std::vector<vec2> move_nodes(const std::vector<vec2>& x, const std::vector<vec2>& v_p,
                             double dt);

// Velocity gradient L = (1/vol) sum_p v_p ⊗ cnr_p from the three corner
// vectors of the given coordinates.
mat2 velocity_gradient(const std::array<vec2, 3>& v, const std::array<vec2, 3>& cnr,
                       double vol);

// Euler update B + dt (L B + B L^t).
sym3 update_B_first_order(const sym3& B, const mat2& L, double dt);

// Crank-Nicolson: solves B' - dt/2 (L1 B' + B' L1^t) = B + dt/2 (L0 B + B L0^t)
// exactly (small dense system). Returns false when the system is singular
// (dt ||L|| too large); caller falls back to the first-order update.
bool update_B_crank_nicolson(const sym3& B, const mat2& L0, const mat2& L1, double dt,
                             sym3& out);

// Applies the B update for the listed cells: Crank-Nicolson at second-order
// levels, Euler at kP0 or when CN degenerates (those cells are appended to
// cn_fallback). Node velocities: v_old at t^n on x_n geometry, v_new at
// t^{n+1} on x_new geometry.
void update_B_cells(const MeshTopology& topo, const std::vector<vec2>& x_n,
                    const std::vector<vec2>& x_new, const std::vector<vec2>& v_old,
                    const std::vector<vec2>& v_new, const std::vector<vec2>& v_star,
                    const std::vector<CellState>& q_n, const std::vector<int>& levels,
                    double dt, const std::vector<int>& cells,
                    std::vector<CellState>& q_out, std::vector<int>* cn_fallback);

}  // namespace lagfv

#endif
