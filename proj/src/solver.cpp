#include "lagfv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lagfv {

namespace {

constexpr double kParallelTol = 1e-10;
constexpr double kValueTol = 1e-9;

vec2 solve_spd2(const mat2& m, vec2 r, int node) {
  double tr = m.xx + m.yy;
  double det = m.xx * m.yy - m.xy * m.yx;
  if (!(tr > 0.0) || det <= 1e-28 * tr * tr)
    throw std::runtime_error("node " + std::to_string(node) +
                             ": singular nodal matrix (zero impedance everywhere?)");
  return {(m.yy * r.x - m.xy * r.y) / det, (m.xx * r.y - m.yx * r.x) / det};
}

// Outward half-face vector (|f|/2) n̂ of a boundary face; face_nodes keeps
// the owning cell's ccw traversal order, so the outward normal is a -90°
// rotation of the edge.
vec2 boundary_half_face(const MeshTopology& topo, const std::vector<vec2>& x, int f) {
  vec2 e = x[topo.face_nodes[f][1]] - x[topo.face_nodes[f][0]];
  return {0.5 * e.y, -0.5 * e.x};
}

struct Cstr {
  int rank;
  long order;  // tie break within a rank
  vec2 dir;    // unit direction of the constrained component
  double val;  // prescribed v . dir
};

struct NodeAssembly {
  mat2 M{};
  vec2 rhs{0.0, 0.0};
  std::vector<Cstr> cstr;
};

// Gathers M_p, the momentum right-hand side and the BC constraint list of
// one node. skip_wall suppresses the stuck-contact constraint (used by the
// detachment trial).
NodeAssembly assemble_node(const MeshTopology& topo, const std::vector<vec2>& x,
                           const std::vector<vec2>& v_cp, const std::vector<sym3>& T_cp,
                           const std::vector<double>& z_cell, const BcTable& bc,
                           const std::vector<uint8_t>& stuck, double t_star, int p,
                           bool skip_wall) {
  NodeAssembly out;
  for (int k = topo.n2c_off[p]; k < topo.n2c_off[p + 1]; ++k) {
    int c = topo.n2c_cell[k];
    int loc = topo.n2c_local[k];
    const auto& cell = topo.cells[c];
    vec2 a = x[cell[0]], b = x[cell[1]], cc = x[cell[2]];
    mat2 M = subcell_matrix(a, b, cc, loc, z_cell[c]);
    out.M = out.M + M;
    int i = 3 * c + loc;
    out.rhs += M * v_cp[i] - traction(T_cp[i], corner_vector(a, b, cc, loc));
  }

  if (stuck[p] && !skip_wall) {
    const BcSpec* wall = nullptr;
    for (int k = bc.node_face_off[p]; k < bc.node_face_off[p + 1] && !wall; ++k) {
      const BcSpec& s = bc.by_tag[topo.face_tag[bc.node_face[k]]];
      if (s.kind == BcKind::contact) wall = &s;
    }
    if (!wall)
      throw std::logic_error("node " + std::to_string(p) +
                             ": stuck without a contact boundary condition");
    double n = norm(wall->wall_n);
    out.cstr.push_back({1, -1, (1.0 / n) * wall->wall_n, 0.0});
  }

  // Normal-velocity and symmetry data act per tag group: the constraint
  // direction is the aggregated half-face vector of the group at this node.
  struct Group {
    vec2 d{0.0, 0.0};
    long order = 0;
    const BcSpec* spec = nullptr;
  };
  std::vector<std::pair<int, Group>> groups;

  for (int k = bc.node_face_off[p]; k < bc.node_face_off[p + 1]; ++k) {
    int f = bc.node_face[k];
    int tag = topo.face_tag[f];
    const BcSpec& s = bc.by_tag[tag];
    vec2 h = boundary_half_face(topo, x, f);
    switch (s.kind) {
      case BcKind::free_traction:
        break;
      case BcKind::contact:
        break;  // free while detached; the wall enters via `stuck`
      case BcKind::traction:
        out.rhs += -s.pressure * h;
        break;
      case BcKind::fixed: {
        bool seen = false;
        for (auto& c0 : out.cstr) seen = seen || (c0.rank == 1 && c0.order == 2L * f);
        if (!seen) {
          out.cstr.push_back({1, 2L * f, {1.0, 0.0}, 0.0});
          out.cstr.push_back({1, 2L * f + 1, {0.0, 1.0}, 0.0});
        }
        break;
      }
      case BcKind::velocity: {
        vec2 v = s.v_fn ? s.v_fn(x[p], t_star) : s.v_bc;
        out.cstr.push_back({2, 2L * f, {1.0, 0.0}, v.x});
        out.cstr.push_back({2, 2L * f + 1, {0.0, 1.0}, v.y});
        break;
      }
      case BcKind::normal_velocity:
      case BcKind::symmetry: {
        Group* g = nullptr;
        for (auto& [t, gr] : groups)
          if (t == tag) g = &gr;
        if (!g) {
          groups.push_back({tag, Group{}});
          g = &groups.back().second;
          g->order = f;
          g->spec = &s;
        }
        g->d += h;
        g->order = std::min(g->order, static_cast<long>(f));
        break;
      }
    }
  }

  for (auto& [tag, g] : groups) {
    (void)tag;
    double len = norm(g.d);
    if (len <= 1e-300) continue;
    vec2 n = (1.0 / len) * g.d;
    if (g.spec->kind == BcKind::symmetry) {
      out.cstr.push_back({3, 2L * g.order, n, 0.0});
    } else {
      vec2 v = g.spec->v_fn ? g.spec->v_fn(x[p], t_star) : g.spec->v_bc;
      out.cstr.push_back({2, 2L * g.order, n, dot(v, n)});
    }
  }

  std::sort(out.cstr.begin(), out.cstr.end(), [](const Cstr& a, const Cstr& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.order < b.order;
  });
  return out;
}

vec2 resolve_node(const NodeAssembly& in, int p, NodeSolveStats* stats) {
  // Reduce the sorted constraint list to at most two independent ones,
  // dropping lower-priority redundant or conflicting data.
  struct Active {
    vec2 dir;
    double val;
    int rank;
  };
  Active act[2];
  int na = 0;
  for (const Cstr& c : in.cstr) {
    if (na == 0) {
      act[0] = {c.dir, c.val, c.rank};
      na = 1;
      continue;
    }
    if (na == 1) {
      double s = cross(act[0].dir, c.dir);
      if (std::fabs(s) <= kParallelTol) {
        double sign = dot(act[0].dir, c.dir) >= 0.0 ? 1.0 : -1.0;
        if (std::fabs(sign * c.val - act[0].val) <= kValueTol * (1.0 + std::fabs(act[0].val)))
          continue;  // same data, merged
        if (c.rank == act[0].rank)
          throw std::runtime_error("node " + std::to_string(p) +
                                   ": contradictory boundary constraints");
        if (stats) stats->dropped_constraints++;
        continue;
      }
      act[1] = {c.dir, c.val, c.rank};
      na = 2;
      continue;
    }
    // Node fully determined: further compatible data merges, the rest drops.
    double det = cross(act[0].dir, act[1].dir);
    vec2 v{(act[0].val * act[1].dir.y - act[1].val * act[0].dir.y) / det,
           (act[1].val * act[0].dir.x - act[0].val * act[1].dir.x) / det};
    if (std::fabs(dot(v, c.dir) - c.val) > kValueTol * (1.0 + std::fabs(c.val))) {
      if (stats) stats->dropped_constraints++;
    }
  }

  if (na == 0) return solve_spd2(in.M, in.rhs, p);
  if (na == 1) {
    vec2 vhat = solve_spd2(in.M, in.rhs, p);
    vec2 w = solve_spd2(in.M, act[0].dir, p);
    double lam = (act[0].val - dot(vhat, act[0].dir)) / dot(w, act[0].dir);
    return vhat + lam * w;
  }
  double det = cross(act[0].dir, act[1].dir);
  return {(act[0].val * act[1].dir.y - act[1].val * act[0].dir.y) / det,
          (act[1].val * act[0].dir.x - act[0].val * act[1].dir.x) / det};
}

mat3 mat3_mul_sym(const mat3& l, const sym3& b) {
  mat3 bm = to_mat3(b);
  mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += l.a[i][k] * bm.a[k][j];
      r.a[i][j] = s;
    }
  return r;
}

// L B + B L^t as a symmetric tensor: P + P^t with P = L B.
sym3 sym_rate(const mat2& l, const sym3& b) {
  mat3 p = mat3_mul_sym(embed(l), b);
  sym3 s;
  s.xx = 2.0 * p.a[0][0];
  s.yy = 2.0 * p.a[1][1];
  s.zz = 2.0 * p.a[2][2];
  s.xy = p.a[0][1] + p.a[1][0];
  s.xz = p.a[0][2] + p.a[2][0];
  s.yz = p.a[1][2] + p.a[2][1];
  return s;
}

sym3 basis6(int i) {
  sym3 b{};
  switch (i) {
    case 0: b.xx = 1.0; break;
    case 1: b.yy = 1.0; break;
    case 2: b.zz = 1.0; break;
    case 3: b.xy = 1.0; break;
    case 4: b.xz = 1.0; break;
    default: b.yz = 1.0; break;
  }
  return b;
}

}  // namespace

int bc_rank(BcKind kind) {
  switch (kind) {
    case BcKind::contact:
    case BcKind::fixed:
      return 1;
    case BcKind::traction:
    case BcKind::normal_velocity:
    case BcKind::velocity:
      return 2;
    case BcKind::symmetry:
      return 3;
    case BcKind::free_traction:
      return 4;
  }
  return 4;
}

BcTable build_bc_table(const MeshTopology& topo,
                       const std::vector<std::pair<int, BcSpec>>& specs) {
  BcTable t;
  int max_tag = 0;
  for (int f : topo.boundary_faces) max_tag = std::max(max_tag, topo.face_tag[f]);
  for (auto& [tag, spec] : specs) {
    if (tag < 0) throw std::runtime_error("negative boundary tag");
    max_tag = std::max(max_tag, tag);
  }
  t.by_tag.assign(max_tag + 1, BcSpec{});
  for (auto& [tag, spec] : specs) t.by_tag[tag] = spec;

  std::vector<int> count(topo.n_nodes, 0);
  for (int f : topo.boundary_faces) {
    count[topo.face_nodes[f][0]]++;
    count[topo.face_nodes[f][1]]++;
  }
  t.node_face_off.assign(topo.n_nodes + 1, 0);
  for (int p = 0; p < topo.n_nodes; ++p) t.node_face_off[p + 1] = t.node_face_off[p] + count[p];
  t.node_face.resize(t.node_face_off.back());
  std::vector<int> fill(topo.n_nodes, 0);
  for (int f : topo.boundary_faces) {
    for (int s = 0; s < 2; ++s) {
      int p = topo.face_nodes[f][s];
      t.node_face[t.node_face_off[p] + fill[p]++] = f;
    }
  }
  // Keep incident faces sorted so tie-breaking by face index is stable.
  for (int p = 0; p < topo.n_nodes; ++p)
    std::sort(t.node_face.begin() + t.node_face_off[p],
              t.node_face.begin() + t.node_face_off[p + 1]);
  return t;
}

mat2 impedance_matrix(const std::array<vec2, 2>& half_faces, double z) {
  mat2 m{};
  for (const vec2& h : half_faces) {
    double len = norm(h);
    if (len <= 0.0) continue;
    m = m + (z / len) * outer(h, h);
  }
  return m;
}

mat2 subcell_matrix(vec2 a, vec2 b, vec2 c, int local, double z) {
  return impedance_matrix(corner_half_faces(a, b, c, local), z);
}

void solve_nodes(const MeshTopology& topo, const std::vector<vec2>& x,
                 const std::vector<vec2>& v_cp, const std::vector<sym3>& T_cp,
                 const std::vector<double>& z_cell, const BcTable& bc,
                 const std::vector<uint8_t>& stuck, double t_star,
                 const std::vector<int>* nodes, std::vector<vec2>& v_p,
                 NodeSolveStats* stats) {
  v_p.resize(topo.n_nodes);
  auto solve_one = [&](int p) {
    NodeAssembly a =
        assemble_node(topo, x, v_cp, T_cp, z_cell, bc, stuck, t_star, p, false);
    if (stats && !a.cstr.empty()) stats->constrained_nodes++;
    v_p[p] = resolve_node(a, p, stats);
  };
  if (nodes) {
    for (int p : *nodes) solve_one(p);
  } else {
    for (int p = 0; p < topo.n_nodes; ++p) solve_one(p);
  }
}

vec2 solve_node_unconstrained(const MeshTopology& topo, const std::vector<vec2>& x,
                              const std::vector<vec2>& v_cp, const std::vector<sym3>& T_cp,
                              const std::vector<double>& z_cell, const BcTable& bc,
                              double t_star, int node) {
  std::vector<uint8_t> stuck(topo.n_nodes, 0);
  NodeAssembly a =
      assemble_node(topo, x, v_cp, T_cp, z_cell, bc, stuck, t_star, node, true);
  return resolve_node(a, node, nullptr);
}

double wall_distance(vec2 x, const BcSpec& contact) {
  double n = norm(contact.wall_n);
  return (dot(contact.wall_n, x) - contact.wall_b) / n;
}

double wall_landing_time(vec2 x, vec2 v, const BcSpec& contact) {
  double n = norm(contact.wall_n);
  double s = (dot(contact.wall_n, x) - contact.wall_b) / n;
  double rate = -dot(contact.wall_n, v) / n;
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return s / rate;
}

vec2 subcell_force(const mat2& M_cp, const sym3& T_cp, vec2 cnr, vec2 v_p, vec2 v_cp) {
  return traction(T_cp, cnr) + M_cp * (v_p - v_cp);
}

void correct_cells(const CorrectorIn& in, const std::vector<int>& cells,
                   std::vector<CellState>& q_out, std::vector<double>& entropy) {
  const MeshTopology& topo = *in.topo;
  for (int c : cells) {
    const auto& cell = topo.cells[c];
    vec2 a = (*in.x_n)[cell[0]], b = (*in.x_n)[cell[1]], cc = (*in.x_n)[cell[2]];
    double mc = (*in.m_cell)[c];
    double dtau = 0.0, de = 0.0, ent = 0.0;
    vec2 dv{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      int p = cell[k];
      int i = 3 * c + k;
      vec2 cnr = in.geom_n->cnr[i];
      mat2 M = subcell_matrix(a, b, cc, k, (*in.z_cell)[c]);
      vec2 vp = (*in.v_p)[p];
      vec2 dw = vp - (*in.v_cp)[i];
      vec2 f = traction((*in.T_cp)[i], cnr) + M * dw;
      dtau += dot(cnr, vp);
      dv += f;
      de += dot(f, vp);
      ent += dot(M * dw, dw);
    }
    const CellState& s = (*in.q_n)[c];
    CellState& o = q_out[c];
    o = s;
    o.tau = s.tau + in.dt / mc * dtau;
    o.v = s.v + in.dt / mc * dv;
    o.e = s.e + in.dt / mc * de;
    entropy[c] = ent;
  }
}

std::vector<vec2> move_nodes(const std::vector<vec2>& x, const std::vector<vec2>& v_p,
                             double dt) {
  std::vector<vec2> out(x.size());
  for (size_t p = 0; p < x.size(); ++p) out[p] = x[p] + dt * v_p[p];
  return out;
}

mat2 velocity_gradient(const std::array<vec2, 3>& v, const std::array<vec2, 3>& cnr,
                       double vol) {
  mat2 l{};
  for (int k = 0; k < 3; ++k) l = l + outer(v[k], cnr[k]);
  return (1.0 / vol) * l;
}

sym3 update_B_first_order(const sym3& B, const mat2& L, double dt) {
  return B + dt * sym_rate(L, B);
}

bool update_B_crank_nicolson(const sym3& B, const mat2& L0, const mat2& L1, double dt,
                             sym3& out) {
  Eigen::Matrix<double, 6, 6> A;
  for (int j = 0; j < 6; ++j) {
    sym3 e = basis6(j);
    sym3 col = e - 0.5 * dt * sym_rate(L1, e);
    A(0, j) = col.xx;
    A(1, j) = col.yy;
    A(2, j) = col.zz;
    A(3, j) = col.xy;
    A(4, j) = col.xz;
    A(5, j) = col.yz;
  }
  sym3 r = B + 0.5 * dt * sym_rate(L0, B);
  Eigen::Matrix<double, 6, 1> rhs;
  rhs << r.xx, r.yy, r.zz, r.xy, r.xz, r.yz;
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(A);
  if (!lu.isInvertible()) return false;
  Eigen::Matrix<double, 6, 1> u = lu.solve(rhs);
  if (!u.allFinite()) return false;
  out = sym3{u(0), u(1), u(2), u(3), u(4), u(5)};
  return true;
}

void update_B_cells(const MeshTopology& topo, const std::vector<vec2>& x_n,
                    const std::vector<vec2>& x_new, const std::vector<vec2>& v_old,
                    const std::vector<vec2>& v_new, const std::vector<vec2>& v_star,
                    const std::vector<CellState>& q_n, const std::vector<int>& levels,
                    double dt, const std::vector<int>& cells,
                    std::vector<CellState>& q_out, std::vector<int>* cn_fallback) {
  for (int c : cells) {
    const auto& cell = topo.cells[c];
    std::array<vec2, 3> xa{x_n[cell[0]], x_n[cell[1]], x_n[cell[2]]};
    double vol_n = cell_volume(xa[0], xa[1], xa[2]);
    std::array<vec2, 3> cn_n;
    for (int k = 0; k < 3; ++k) cn_n[k] = corner_vector(xa[0], xa[1], xa[2], k);

    const sym3& B = q_n[c].B;
    sym3 result;
    bool euler = levels[c] == kP0 || dt == 0.0;
    if (!euler) {
      std::array<vec2, 3> xb{x_new[cell[0]], x_new[cell[1]], x_new[cell[2]]};
      double vol_new = cell_volume(xb[0], xb[1], xb[2]);
      bool ok = vol_new > 0.0;
      if (ok) {
        std::array<vec2, 3> cn_new, vo, vn;
        for (int k = 0; k < 3; ++k) {
          cn_new[k] = corner_vector(xb[0], xb[1], xb[2], k);
          vo[k] = v_old[cell[k]];
          vn[k] = v_new[cell[k]];
        }
        mat2 l0 = velocity_gradient(vo, cn_n, vol_n);
        mat2 l1 = velocity_gradient(vn, cn_new, vol_new);
        ok = update_B_crank_nicolson(B, l0, l1, dt, result);
      }
      if (!ok) {
        euler = true;
        if (cn_fallback) cn_fallback->push_back(c);
      }
    }
    if (euler) {
      std::array<vec2, 3> vs;
      for (int k = 0; k < 3; ++k) vs[k] = v_star[cell[k]];
      result = update_B_first_order(B, velocity_gradient(vs, cn_n, vol_n), dt);
    }
    q_out[c].B = result;
  }
}

}  // namespace lagfv
