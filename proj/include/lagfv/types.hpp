#ifndef LAGFV_TYPES_HPP
#define LAGFV_TYPES_HPP

#include <cmath>

namespace lagfv {

struct vec2 {
  double x = 0.0, y = 0.0;
};

inline vec2 operator+(vec2 a, vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline vec2 operator-(vec2 a, vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline vec2 operator*(double s, vec2 a) { return {s * a.x, s * a.y}; }
inline vec2 operator*(vec2 a, double s) { return {s * a.x, s * a.y}; }
inline vec2& operator+=(vec2& a, vec2 b) { a.x += b.x; a.y += b.y; return a; }
inline vec2& operator-=(vec2& a, vec2 b) { a.x -= b.x; a.y -= b.y; return a; }
inline double dot(vec2 a, vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(vec2 a, vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// General 2x2 matrix (velocity gradients).
struct mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
};

inline mat2 operator+(mat2 a, mat2 b) {
  return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy};
}
inline mat2 operator*(double s, mat2 a) { return {s * a.xx, s * a.xy, s * a.yx, s * a.yy}; }
inline vec2 operator*(mat2 m, vec2 v) {
  return {m.xx * v.x + m.xy * v.y, m.yx * v.x + m.yy * v.y};
}
// a (x) b
inline mat2 outer(vec2 a, vec2 b) {
  return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}
inline double trace(mat2 m) { return m.xx + m.yy; }

// General 3x3 matrix.
struct mat3 {
  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
};

inline mat3 operator+(const mat3& x, const mat3& y) {
  mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.a[i][j] = x.a[i][j] + y.a[i][j];
  return r;
}
inline mat3 operator-(const mat3& x, const mat3& y) {
  mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.a[i][j] = x.a[i][j] - y.a[i][j];
  return r;
}
inline mat3 operator*(double s, const mat3& x) {
  mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.a[i][j] = s * x.a[i][j];
  return r;
}
inline mat3 operator*(const mat3& x, const mat3& y) {
  mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) {
      double s = 0.0;
      for (int k = 0; k < 3; k++) s += x.a[i][k] * y.a[k][j];
      r.a[i][j] = s;
    }
  return r;
}
inline mat3 transpose(const mat3& x) {
  mat3 r;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) r.a[i][j] = x.a[j][i];
  return r;
}
inline double trace(const mat3& x) { return x.a[0][0] + x.a[1][1] + x.a[2][2]; }
inline double det(const mat3& x) {
  return x.a[0][0] * (x.a[1][1] * x.a[2][2] - x.a[1][2] * x.a[2][1]) -
         x.a[0][1] * (x.a[1][0] * x.a[2][2] - x.a[1][2] * x.a[2][0]) +
         x.a[0][2] * (x.a[1][0] * x.a[2][1] - x.a[1][1] * x.a[2][0]);
}
inline double ddot(const mat3& x, const mat3& y) {
  double s = 0.0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) s += x.a[i][j] * y.a[i][j];
  return s;
}
inline mat3 mat3_identity() {
  mat3 r;
  r.a[0][0] = r.a[1][1] = r.a[2][2] = 1.0;
  return r;
}
inline double frobenius(const mat3& x) {
  double s = 0.0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) s += x.a[i][j] * x.a[i][j];
  return std::sqrt(s);
}
// Embed a 2x2 block into 3x3, zero elsewhere.
inline mat3 embed(mat2 m) {
  mat3 r;
  r.a[0][0] = m.xx;
  r.a[0][1] = m.xy;
  r.a[1][0] = m.yx;
  r.a[1][1] = m.yy;
  return r;
}

// Symmetric 3x3 tensor (left Cauchy-Green tensor, Cauchy stress).
struct sym3 {
  double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0, xz = 0.0, yz = 0.0;
};

inline sym3 sym3_identity() { return {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }
inline sym3 operator+(sym3 a, sym3 b) {
  return {a.xx + b.xx, a.yy + b.yy, a.zz + b.zz, a.xy + b.xy, a.xz + b.xz, a.yz + b.yz};
}
inline sym3 operator-(sym3 a, sym3 b) {
  return {a.xx - b.xx, a.yy - b.yy, a.zz - b.zz, a.xy - b.xy, a.xz - b.xz, a.yz - b.yz};
}
inline sym3 operator*(double s, sym3 a) {
  return {s * a.xx, s * a.yy, s * a.zz, s * a.xy, s * a.xz, s * a.yz};
}
inline double trace(sym3 a) { return a.xx + a.yy + a.zz; }
// In-plane action T · u of the upper 2x2 block (traction on a face vector).
inline vec2 traction(sym3 t, vec2 u) {
  return {t.xx * u.x + t.xy * u.y, t.xy * u.x + t.yy * u.y};
}
inline double det(sym3 a) {
  return a.xx * (a.yy * a.zz - a.yz * a.yz) - a.xy * (a.xy * a.zz - a.yz * a.xz) +
         a.xz * (a.xy * a.yz - a.yy * a.xz);
}
inline sym3 inverse(sym3 a) {
  double d = det(a);
  sym3 r;
  r.xx = (a.yy * a.zz - a.yz * a.yz) / d;
  r.yy = (a.xx * a.zz - a.xz * a.xz) / d;
  r.zz = (a.xx * a.yy - a.xy * a.xy) / d;
  r.xy = (a.xz * a.yz - a.xy * a.zz) / d;
  r.xz = (a.xy * a.yz - a.xz * a.yy) / d;
  r.yz = (a.xy * a.xz - a.xx * a.yz) / d;
  return r;
}
inline sym3 deviator(sym3 a) {
  double t = trace(a) / 3.0;
  sym3 r = a;
  r.xx -= t;
  r.yy -= t;
  r.zz -= t;
  return r;
}
inline mat3 to_mat3(sym3 a) {
  mat3 r;
  r.a[0][0] = a.xx;
  r.a[1][1] = a.yy;
  r.a[2][2] = a.zz;
  r.a[0][1] = r.a[1][0] = a.xy;
  r.a[0][2] = r.a[2][0] = a.xz;
  r.a[1][2] = r.a[2][1] = a.yz;
  return r;
}
inline double max_abs(sym3 a) {
  double m = std::fabs(a.xx);
  m = std::fmax(m, std::fabs(a.yy));
  m = std::fmax(m, std::fabs(a.zz));
  m = std::fmax(m, std::fabs(a.xy));
  m = std::fmax(m, std::fabs(a.xz));
  m = std::fmax(m, std::fabs(a.yz));
  return m;
}
// Leading principal minors all positive <=> symmetric positive definite.
inline bool is_spd(sym3 a) {
  if (!(a.xx > 0.0)) return false;
  if (!(a.xx * a.yy - a.xy * a.xy > 0.0)) return false;
  return det(a) > 0.0;
}
inline bool is_finite(sym3 a) {
  return std::isfinite(a.xx) && std::isfinite(a.yy) && std::isfinite(a.zz) &&
         std::isfinite(a.xy) && std::isfinite(a.xz) && std::isfinite(a.yz);
}

}  // namespace lagfv

#endif
