#ifndef LAGFV_MESH_HPP
#define LAGFV_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "lagfv/types.hpp"

namespace lagfv {

// Connectivity of a conforming 2D triangulation. Cells are counterclockwise;
// mixed-orientation input is repaired at ingestion. Local edge k of a cell
// joins local vertices k and (k+1)%3.
struct MeshTopology {
  int n_nodes = 0;
  std::vector<std::array<int, 3>> cells;

  // node -> incident (cell, local corner), CSR
  std::vector<int> n2c_off;
  std::vector<int> n2c_cell;
  std::vector<int> n2c_local;

  std::vector<std::array<int, 2>> face_nodes;
  std::vector<std::array<int, 2>> face_cells;  // second = -1 on the boundary
  std::vector<std::array<int, 3>> cell_faces;  // face id per local edge
  std::vector<int> boundary_faces;
  std::vector<int> face_tag;  // 0 interior / untagged

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_faces() const { return static_cast<int>(face_nodes.size()); }
};

// Time-dependent geometry, recomputed from node coordinates.
struct MeshGeometry {
  std::vector<double> vol;   // per cell
  std::vector<vec2> cnr;     // corner vectors l n, 3 per cell
  std::vector<double> Lc;    // in-circle diameter per cell
  double min_Lc = 0.0;
};

struct MassPartition {
  std::vector<double> m_cell;
  std::vector<double> m_sub;  // 3 per cell
  std::vector<double> m_node;
};

// Signed shoelace area of a triangle.
double cell_volume(vec2 a, vec2 b, vec2 c);

// d|omega|/dx_p for local vertex p of a counterclockwise triangle:
// 0.5 * (y_next - y_prev, x_prev - x_next).
vec2 corner_vector(vec2 a, vec2 b, vec2 c, int local);

// The two half-face vectors (|f|/2 * outward normal) of the cell faces
// meeting at local vertex p, ordered as local edges (p+2)%3 then p; their
// sum is the corner vector.
std::array<vec2, 2> corner_half_faces(vec2 a, vec2 b, vec2 c, int local);

// In-circle diameter 2*Area/semiperimeter.
double characteristic_length(vec2 a, vec2 b, vec2 c);

MeshTopology build_topology(const std::vector<vec2>& nodes,
                            std::vector<std::array<int, 3>> cells);

// Tags boundary faces given (n1, n2, tag) records; unknown or interior
// faces raise.
void set_boundary_tags(MeshTopology& topo,
                       const std::vector<std::array<int, 3>>& tagged_faces);

// Recomputes volumes, corner vectors and characteristic lengths in place.
// Non-positive volume aborts with the offending cell id unless
// allow_invalid is set (MOOD candidate screening does its own checks).
void update_geometry(const MeshTopology& topo, const std::vector<vec2>& x,
                     MeshGeometry& geom, bool allow_invalid = false);
MeshGeometry compute_geometry(const MeshTopology& topo, const std::vector<vec2>& x,
                              bool allow_invalid = false);

// Subcell mass partition on the initial geometry; the vertex quadrangle
// (vertex, two edge midpoints, centroid) of a triangle carries a third of
// the cell, so m_cp = rho0_c * |omega_c| / 3.
MassPartition subcell_masses(const MeshTopology& topo, const MeshGeometry& geom,
                             const std::vector<double>& rho0);

struct Mesh {
  MeshTopology topo;
  std::vector<vec2> x;
};

// Quadrisection of every triangle through edge midpoints; boundary children
// inherit the parent face tag.
Mesh refine_all(const MeshTopology& topo, const std::vector<vec2>& x);

// Structured triangulations of a rectangle. Boundary tags:
// 1 left, 2 right, 3 bottom, 4 top.
enum class RectPattern { split, cross };
Mesh make_rect_mesh(int nx, int ny, double x0, double y0, double x1, double y1,
                    RectPattern pattern = RectPattern::split);

// Plain ASCII mesh format:
//   nodes N cells M dim 2
//   N lines: x y
//   M lines: i j k        (0-based vertex ids)
//   remaining lines: n1 n2 bc_tag
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

// Converts gmsh .msh v2 ASCII ($Nodes/$Elements) to the plain format.
// 2-node elements become tagged boundary faces (physical tag), 3-node
// elements become cells.
Mesh read_msh_v2(const std::string& path);

}  // namespace lagfv

#endif
