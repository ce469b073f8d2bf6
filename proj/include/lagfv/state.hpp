#ifndef LAGFV_STATE_HPP
#define LAGFV_STATE_HPP

#include <array>

#include "lagfv/types.hpp"

namespace lagfv {

// Per-cell unknowns: specific volume, velocity, total specific energy and
// the left Cauchy-Green tensor.
struct CellState {
  double tau = 1.0;
  vec2 v{0.0, 0.0};
  double e = 0.0;
  sym3 B = sym3_identity();
};

// Flat component view used by reconstruction, limiting and detection.
constexpr int NVAR = 10;
using StateVec = std::array<double, NVAR>;

inline StateVec pack(const CellState& s) {
  return {s.tau, s.v.x, s.v.y, s.e, s.B.xx, s.B.yy, s.B.zz, s.B.xy, s.B.xz, s.B.yz};
}

inline CellState unpack(const StateVec& q) {
  CellState s;
  s.tau = q[0];
  s.v = {q[1], q[2]};
  s.e = q[3];
  s.B.xx = q[4];
  s.B.yy = q[5];
  s.B.zz = q[6];
  s.B.xy = q[7];
  s.B.xz = q[8];
  s.B.yz = q[9];
  return s;
}

// Cascade of per-cell scheme levels, best first.
enum CellLevel : int { kP0 = 0, kP1BJ = 1, kP1 = 2 };

}  // namespace lagfv

#endif
