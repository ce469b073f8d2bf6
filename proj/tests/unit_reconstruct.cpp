#include <cmath>
#include <vector>

#include "doctest.h"
#include "lagfv/reconstruct.hpp"

using namespace lagfv;

namespace {

std::vector<StateVec> field_on_centroids(const Mesh& mesh, int slot,
                                         double (*f)(double, double)) {
  std::vector<StateVec> q(mesh.topo.n_cells());
  for (int c = 0; c < mesh.topo.n_cells(); c++) {
    vec2 g = (1.0 / 3.0) * (mesh.x[mesh.topo.cells[c][0]] + mesh.x[mesh.topo.cells[c][1]] +
                            mesh.x[mesh.topo.cells[c][2]]);
    q[c] = StateVec{};
    q[c][slot] = f(g.x, g.y);
  }
  return q;
}

std::vector<int> face_neighbors(const MeshTopology& topo, int c) {
  std::vector<int> out;
  for (int k = 0; k < 3; k++) {
    auto fc = topo.face_cells[topo.cell_faces[c][k]];
    int j = fc[0] == c ? fc[1] : fc[0];
    if (j >= 0) out.push_back(j);
  }
  return out;
}

}  // namespace

TEST_CASE("least squares gradient building block") {
  vec2 dx[3] = {{1.0, 0.2}, {-0.3, 0.9}, {0.5, -0.7}};
  double dq0[3] = {0, 0, 0};
  vec2 g = least_squares_gradient(dx, dq0, 3);
  CHECK(norm(g) == 0.0);

  double dq[3];
  for (int i = 0; i < 3; i++) dq[i] = 2.0 * dx[i].x + 3.0 * dx[i].y;
  g = least_squares_gradient(dx, dq, 3);
  CHECK(g.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.y == doctest::Approx(3.0).epsilon(1e-12));

  // single sample and parallel samples are rank deficient
  CHECK(norm(least_squares_gradient(dx, dq, 1)) == 0.0);
  vec2 par[2] = {{1.0, 1.0}, {-2.0, -2.0}};
  double dqp[2] = {0.5, -1.0};
  CHECK(norm(least_squares_gradient(par, dqp, 2)) == 0.0);
}

TEST_CASE("Barth-Jespersen building block") {
  vec2 dxv[3] = {{-0.5, -0.4}, {0.6, -0.1}, {-0.1, 0.5}};

  // extrapolations inside the bounds: untouched
  CHECK(barth_jespersen(1.0, {0.1, 0.1}, dxv, 3, 0.0, 2.0) == 1.0);
  // isolated spike: own value is the max, any positive excursion clipped
  CHECK(barth_jespersen(5.0, {2.0, 1.0}, dxv, 3, 1.0, 5.0) == 0.0);
  // a vertex overshooting by 2x halves the slope
  vec2 one[1] = {{1.0, 0.0}};
  CHECK(barth_jespersen(0.0, {2.0, 0.0}, one, 1, -1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(barth_jespersen(0.0, {-2.0, 0.0}, one, 1, -1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("reconstruction of a linear field") {
  auto mesh = make_rect_mesh(3, 3, 0, 0, 3, 3);
  auto q = field_on_centroids(mesh, 3, [](double x, double y) { return 2 * x + 3 * y; });
  auto polys = reconstruct_states(mesh.topo, mesh.x, q);

  int degenerate = 0;
  for (int c = 0; c < mesh.topo.n_cells(); c++) {
    if (polys[c].degenerate) {
      degenerate++;
      CHECK(norm(polys[c].grad[3]) == 0.0);
      CHECK(polys[c].phi_bj[3] == 0.0);
      CHECK(face_neighbors(mesh.topo, c).size() < 2);
    } else {
      CHECK(polys[c].grad[3].x == doctest::Approx(2.0).epsilon(1e-11));
      CHECK(polys[c].grad[3].y == doctest::Approx(3.0).epsilon(1e-11));
    }
    // conservative at the centroid, for every level
    for (int level : {kP0, kP1BJ, kP1})
      CHECK(eval_poly(polys[c], level, polys[c].centroid)[3] ==
            doctest::Approx(q[c][3]).epsilon(1e-13));
  }
  // split pattern leaves exactly two single-neighbor corner triangles
  CHECK(degenerate == 2);

  // frozen: lower triangle of quad (1,1) clips its slope to 7/8 at the far
  // vertex under vertex-bound limiting
  CHECK(polys[8].phi_bj[3] == doctest::Approx(7.0 / 8.0).epsilon(1e-13));
}

TEST_CASE("limited vertex values respect stencil bounds") {
  auto mesh = make_rect_mesh(5, 1, 0, 0, 5, 1);
  auto q = field_on_centroids(mesh, 0, [](double x, double) { return x < 2.5 ? 0.0 : 10.0; });
  auto polys = reconstruct_states(mesh.topo, mesh.x, q);

  for (int c = 0; c < mesh.topo.n_cells(); c++) {
    double qmin = q[c][0], qmax = q[c][0];
    for (int j : face_neighbors(mesh.topo, c)) {
      qmin = std::min(qmin, q[j][0]);
      qmax = std::max(qmax, q[j][0]);
    }
    for (int k = 0; k < 3; k++) {
      double v = eval_poly(polys[c], kP1BJ, mesh.x[mesh.topo.cells[c][k]])[0];
      CHECK(v >= qmin - 1e-12);
      CHECK(v <= qmax + 1e-12);
    }
  }
}

TEST_CASE("gradient accuracy improves under refinement") {
  auto coarse = make_rect_mesh(8, 8, 0, 0, 2, 2);
  auto fine = refine_all(coarse.topo, coarse.x);

  auto err = [](const Mesh& mesh) {
    auto q = field_on_centroids(mesh, 0,
                                [](double x, double y) { return std::sin(x) * std::cos(y); });
    auto polys = reconstruct_states(mesh.topo, mesh.x, q);
    double e2 = 0.0;
    int n = 0;
    for (int c = 0; c < mesh.topo.n_cells(); c++) {
      if (polys[c].degenerate) continue;
      vec2 g = polys[c].centroid;
      vec2 exact{std::cos(g.x) * std::cos(g.y), -std::sin(g.x) * std::sin(g.y)};
      vec2 d = polys[c].grad[0] - exact;
      e2 += dot(d, d);
      n++;
    }
    return std::sqrt(e2 / n);
  };

  double e_coarse = err(coarse), e_fine = err(fine);
  CHECK(e_fine < e_coarse / 1.7);
}

TEST_CASE("predictor preserves uniform states") {
  auto mesh = make_rect_mesh(2, 2, 0, 0, 1, 1);
  auto geom = compute_geometry(mesh.topo, mesh.x);
  Material mat = make_material(1000.0, 1e7, 0.3);

  CellState s;
  s.tau = 1.0 / 1000.0;
  s.v = {0.3, -0.2};
  s.e = 0.5 * dot(s.v, s.v);
  std::vector<StateVec> q(mesh.topo.n_cells(), pack(s));
  auto polys = reconstruct_states(mesh.topo, mesh.x, q);

  for (int c = 0; c < mesh.topo.n_cells(); c++) {
    double m_c = 1000.0 * geom.vol[c];
    auto pred = ader_predict(mesh.topo, mesh.x, c, polys[c], kP1, mat, m_c, 1e-3);
    REQUIRE(pred.ok);
    for (int k = 0; k < NVAR; k++)
      CHECK(pred.q_star[k] == doctest::Approx(q[c][k]).epsilon(1e-14));
    for (int k = 0; k < 3; k++) {
      CHECK(norm(pred.v_node[k] - s.v) <= 1e-14);
      CHECK(max_abs(pred.T_node[k]) <= 1e-9);  // unloaded state
    }
    double a = wave_speed(mat, strain_state(s.B));
    CHECK(pred.z == doctest::Approx(1000.0 * a).epsilon(1e-12));
    CHECK(pred.iters <= 2);
  }
}

TEST_CASE("predictor volume change is second order for a linear field") {
  std::vector<vec2> nodes{{0, 0}, {1, 0}, {0, 1}};
  auto topo = build_topology(nodes, {{{0, 1, 2}}});
  Material mat = make_material(1.0, 0.0, 0.0);  // stress-free

  double alpha = 0.4;
  LinearPoly poly;
  poly.centroid = {1.0 / 3.0, 1.0 / 3.0};
  CellState s;
  s.tau = 1.0;
  s.v = {alpha * poly.centroid.x, -alpha * poly.centroid.y};
  s.e = 0.5 * dot(s.v, s.v);
  poly.mean = pack(s);
  poly.grad[1] = {alpha, 0.0};
  poly.grad[2] = {0.0, -alpha};
  for (int k = 0; k < NVAR; k++) poly.phi_bj[k] = 1.0;

  double m_c = 0.5;
  auto dtau = [&](double dt) {
    auto pred = ader_predict(topo, nodes, 0, poly, kP1, mat, m_c, dt);
    REQUIRE(pred.ok);
    return pred.q_star[0] - 1.0;
  };
  // div v = 0: tau stays constant up to O(dt^2)
  double d1 = dtau(2e-3), d2 = dtau(1e-3);
  CHECK(std::abs(d1) < 1e-5);
  CHECK(std::abs(d1 / d2) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("P0 level bypasses time extrapolation") {
  std::vector<vec2> nodes{{0, 0}, {1, 0}, {0, 1}};
  auto topo = build_topology(nodes, {{{0, 1, 2}}});
  Material mat = make_material(1000.0, 1e7, 0.3);

  LinearPoly poly;
  poly.centroid = {1.0 / 3.0, 1.0 / 3.0};
  CellState s;
  s.tau = 1.0 / 1000.0;
  s.v = {5.0, 1.0};
  s.B.xx = 1.2;
  s.B.xy = 0.05;
  s.e = 100.0;
  poly.mean = pack(s);
  poly.grad[1] = {40.0, 10.0};  // large slopes that kP0 must ignore
  poly.grad[2] = {-30.0, 25.0};
  for (int k = 0; k < NVAR; k++) poly.phi_bj[k] = 1.0;

  auto pred = ader_predict(topo, nodes, 0, poly, kP0, mat, 0.5, 1e-3);
  REQUIRE(pred.ok);
  CHECK(pred.iters == 0);
  for (int k = 0; k < NVAR; k++) CHECK(pred.q_star[k] == poly.mean[k]);
  StressEval ev;
  REQUIRE(evaluate_stress(mat, s.B, s.e - 0.5 * dot(s.v, s.v), ev));
  for (int k = 0; k < 3; k++) {
    CHECK(norm(pred.v_node[k] - s.v) == 0.0);
    CHECK(max_abs(pred.T_node[k] - ev.T) == 0.0);
  }
  CHECK(pred.z == doctest::Approx(ev.a_c / s.tau).epsilon(1e-14));
}

TEST_CASE("predictor flags invalid strain data") {
  std::vector<vec2> nodes{{0, 0}, {1, 0}, {0, 1}};
  auto topo = build_topology(nodes, {{{0, 1, 2}}});
  Material mat = make_material(1000.0, 1e7, 0.3);

  LinearPoly poly;
  poly.centroid = {1.0 / 3.0, 1.0 / 3.0};
  CellState s;
  s.tau = 1.0 / 1000.0;
  s.B.xx = -1.0;  // not a strain state
  poly.mean = pack(s);

  auto pred = ader_predict(topo, nodes, 0, poly, kP1, mat, 0.5, 1e-3);
  CHECK_FALSE(pred.ok);
  for (int k = 0; k < NVAR; k++) CHECK(pred.q_star[k] == poly.mean[k]);
}
