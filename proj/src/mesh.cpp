#include "lagfv/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace lagfv {

namespace {

uint64_t edge_key(int u, int w) {
  if (u > w) std::swap(u, w);
  return (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(w);
}

}  // namespace

double cell_volume(vec2 a, vec2 b, vec2 c) { return 0.5 * cross(b - a, c - a); }

vec2 corner_vector(vec2 a, vec2 b, vec2 c, int local) {
  const vec2 v[3] = {a, b, c};
  vec2 next = v[(local + 1) % 3];
  vec2 prev = v[(local + 2) % 3];
  return {0.5 * (next.y - prev.y), 0.5 * (prev.x - next.x)};
}

std::array<vec2, 2> corner_half_faces(vec2 a, vec2 b, vec2 c, int local) {
  const vec2 v[3] = {a, b, c};
  vec2 p = v[local];
  vec2 next = v[(local + 1) % 3];
  vec2 prev = v[(local + 2) % 3];
  // edge (u -> w) of a ccw cell has outward scaled normal (w.y-u.y, u.x-w.x)
  vec2 h_prev{0.5 * (p.y - prev.y), 0.5 * (prev.x - p.x)};
  vec2 h_next{0.5 * (next.y - p.y), 0.5 * (p.x - next.x)};
  return {h_prev, h_next};
}

double characteristic_length(vec2 a, vec2 b, vec2 c) {
  double perim = norm(b - a) + norm(c - b) + norm(a - c);
  return 4.0 * cell_volume(a, b, c) / perim;
}

MeshTopology build_topology(const std::vector<vec2>& nodes,
                            std::vector<std::array<int, 3>> cells) {
  MeshTopology topo;
  topo.n_nodes = static_cast<int>(nodes.size());
  int nc = static_cast<int>(cells.size());

  for (int c = 0; c < nc; c++) {
    auto& cl = cells[c];
    for (int k = 0; k < 3; k++) {
      if (cl[k] < 0 || cl[k] >= topo.n_nodes)
        throw std::runtime_error("cell " + std::to_string(c) + ": node id out of range");
    }
    if (cl[0] == cl[1] || cl[1] == cl[2] || cl[2] == cl[0])
      throw std::runtime_error("cell " + std::to_string(c) + ": repeated vertex");
    double vol = cell_volume(nodes[cl[0]], nodes[cl[1]], nodes[cl[2]]);
    if (vol == 0.0)
      throw std::runtime_error("cell " + std::to_string(c) + ": zero area");
    if (vol < 0.0) std::swap(cl[1], cl[2]);
  }
  topo.cells = std::move(cells);

  topo.cell_faces.resize(nc);
  std::unordered_map<uint64_t, int> face_of;
  face_of.reserve(3 * nc);
  for (int c = 0; c < nc; c++) {
    for (int k = 0; k < 3; k++) {
      int u = topo.cells[c][k];
      int w = topo.cells[c][(k + 1) % 3];
      auto [it, fresh] = face_of.try_emplace(edge_key(u, w), topo.n_faces());
      if (fresh) {
        topo.face_nodes.push_back({u, w});
        topo.face_cells.push_back({c, -1});
      } else {
        int f = it->second;
        if (topo.face_cells[f][1] != -1)
          throw std::runtime_error("edge " + std::to_string(u) + "-" + std::to_string(w) +
                                   " shared by more than two cells");
        if (topo.face_nodes[f][0] == u)
          throw std::runtime_error("edge " + std::to_string(u) + "-" + std::to_string(w) +
                                   " traversed twice in the same direction");
        topo.face_cells[f][1] = c;
      }
      topo.cell_faces[c][k] = it->second;
    }
  }

  for (int f = 0; f < topo.n_faces(); f++)
    if (topo.face_cells[f][1] == -1) topo.boundary_faces.push_back(f);
  topo.face_tag.assign(topo.n_faces(), 0);

  topo.n2c_off.assign(topo.n_nodes + 1, 0);
  for (int c = 0; c < nc; c++)
    for (int k = 0; k < 3; k++) topo.n2c_off[topo.cells[c][k] + 1]++;
  for (int p = 0; p < topo.n_nodes; p++) topo.n2c_off[p + 1] += topo.n2c_off[p];
  topo.n2c_cell.resize(topo.n2c_off.back());
  topo.n2c_local.resize(topo.n2c_off.back());
  std::vector<int> fill(topo.n2c_off.begin(), topo.n2c_off.end() - 1);
  for (int c = 0; c < nc; c++)
    for (int k = 0; k < 3; k++) {
      int slot = fill[topo.cells[c][k]]++;
      topo.n2c_cell[slot] = c;
      topo.n2c_local[slot] = k;
    }
  return topo;
}

void set_boundary_tags(MeshTopology& topo,
                       const std::vector<std::array<int, 3>>& tagged_faces) {
  std::unordered_map<uint64_t, int> face_of;
  for (int f : topo.boundary_faces)
    face_of[edge_key(topo.face_nodes[f][0], topo.face_nodes[f][1])] = f;
  for (const auto& rec : tagged_faces) {
    auto it = face_of.find(edge_key(rec[0], rec[1]));
    if (it == face_of.end())
      throw std::runtime_error("no boundary face " + std::to_string(rec[0]) + "-" +
                               std::to_string(rec[1]));
    topo.face_tag[it->second] = rec[2];
  }
}

void update_geometry(const MeshTopology& topo, const std::vector<vec2>& x,
                     MeshGeometry& geom, bool allow_invalid) {
  int nc = topo.n_cells();
  geom.vol.resize(nc);
  geom.cnr.resize(3 * nc);
  geom.Lc.resize(nc);
  geom.min_Lc = std::numeric_limits<double>::max();
  for (int c = 0; c < nc; c++) {
    vec2 a = x[topo.cells[c][0]], b = x[topo.cells[c][1]], d = x[topo.cells[c][2]];
    double vol = cell_volume(a, b, d);
    if (vol <= 0.0 && !allow_invalid)
      throw std::runtime_error("cell " + std::to_string(c) + ": non-positive volume " +
                               std::to_string(vol));
    geom.vol[c] = vol;
    for (int k = 0; k < 3; k++) geom.cnr[3 * c + k] = corner_vector(a, b, d, k);
    geom.Lc[c] = characteristic_length(a, b, d);
    geom.min_Lc = std::min(geom.min_Lc, geom.Lc[c]);
  }
}

MeshGeometry compute_geometry(const MeshTopology& topo, const std::vector<vec2>& x,
                              bool allow_invalid) {
  MeshGeometry geom;
  update_geometry(topo, x, geom, allow_invalid);
  return geom;
}

MassPartition subcell_masses(const MeshTopology& topo, const MeshGeometry& geom,
                             const std::vector<double>& rho0) {
  MassPartition mp;
  int nc = topo.n_cells();
  mp.m_cell.resize(nc);
  mp.m_sub.resize(3 * nc);
  mp.m_node.assign(topo.n_nodes, 0.0);
  for (int c = 0; c < nc; c++) {
    mp.m_cell[c] = rho0[c] * geom.vol[c];
    for (int k = 0; k < 3; k++) {
      mp.m_sub[3 * c + k] = mp.m_cell[c] / 3.0;
      mp.m_node[topo.cells[c][k]] += mp.m_sub[3 * c + k];
    }
  }
  return mp;
}

Mesh refine_all(const MeshTopology& topo, const std::vector<vec2>& x) {
  Mesh fine;
  fine.x = x;
  std::unordered_map<uint64_t, int> mid;
  auto midpoint = [&](int u, int w) {
    auto [it, fresh] = mid.try_emplace(edge_key(u, w), static_cast<int>(fine.x.size()));
    if (fresh) fine.x.push_back(0.5 * (x[u] + x[w]));
    return it->second;
  };

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * topo.n_cells());
  for (int c = 0; c < topo.n_cells(); c++) {
    int i0 = topo.cells[c][0], i1 = topo.cells[c][1], i2 = topo.cells[c][2];
    int m01 = midpoint(i0, i1), m12 = midpoint(i1, i2), m20 = midpoint(i2, i0);
    cells.push_back({i0, m01, m20});
    cells.push_back({i1, m12, m01});
    cells.push_back({i2, m20, m12});
    cells.push_back({m01, m12, m20});
  }

  std::vector<std::array<int, 3>> tags;
  for (int f : topo.boundary_faces) {
    if (topo.face_tag[f] == 0) continue;
    int u = topo.face_nodes[f][0], w = topo.face_nodes[f][1];
    int m = midpoint(u, w);
    tags.push_back({u, m, topo.face_tag[f]});
    tags.push_back({m, w, topo.face_tag[f]});
  }

  fine.topo = build_topology(fine.x, std::move(cells));
  set_boundary_tags(fine.topo, tags);
  return fine;
}

Mesh make_rect_mesh(int nx, int ny, double x0, double y0, double x1, double y1,
                    RectPattern pattern) {
  if (nx < 1 || ny < 1) throw std::runtime_error("make_rect_mesh: need nx, ny >= 1");
  Mesh mesh;
  auto vid = [nx](int i, int j) { return i + j * (nx + 1); };
  for (int j = 0; j <= ny; j++)
    for (int i = 0; i <= nx; i++)
      mesh.x.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});

  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < ny; j++)
    for (int i = 0; i < nx; i++) {
      int n00 = vid(i, j), n10 = vid(i + 1, j), n11 = vid(i + 1, j + 1), n01 = vid(i, j + 1);
      if (pattern == RectPattern::split) {
        cells.push_back({n00, n10, n11});
        cells.push_back({n00, n11, n01});
      } else {
        int nc = static_cast<int>(mesh.x.size());
        mesh.x.push_back({x0 + (x1 - x0) * (i + 0.5) / nx, y0 + (y1 - y0) * (j + 0.5) / ny});
        cells.push_back({n00, n10, nc});
        cells.push_back({n10, n11, nc});
        cells.push_back({n11, n01, nc});
        cells.push_back({n01, n00, nc});
      }
    }
  mesh.topo = build_topology(mesh.x, std::move(cells));

  std::vector<std::array<int, 3>> tags;
  for (int j = 0; j < ny; j++) {
    tags.push_back({vid(0, j), vid(0, j + 1), 1});
    tags.push_back({vid(nx, j), vid(nx, j + 1), 2});
  }
  for (int i = 0; i < nx; i++) {
    tags.push_back({vid(i, 0), vid(i + 1, 0), 3});
    tags.push_back({vid(i, ny), vid(i + 1, ny), 4});
  }
  set_boundary_tags(mesh.topo, tags);
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path);
  std::string kw_nodes, kw_cells, kw_dim;
  int n_nodes = 0, n_cells = 0, dim = 0;
  in >> kw_nodes >> n_nodes >> kw_cells >> n_cells >> kw_dim >> dim;
  if (!in || kw_nodes != "nodes" || kw_cells != "cells" || kw_dim != "dim" || dim != 2)
    throw std::runtime_error(path + ": bad mesh header, expected 'nodes N cells M dim 2'");

  Mesh mesh;
  mesh.x.resize(n_nodes);
  for (int p = 0; p < n_nodes; p++) in >> mesh.x[p].x >> mesh.x[p].y;
  std::vector<std::array<int, 3>> cells(n_cells);
  for (int c = 0; c < n_cells; c++) in >> cells[c][0] >> cells[c][1] >> cells[c][2];
  if (!in) throw std::runtime_error(path + ": truncated mesh file");

  std::vector<std::array<int, 3>> tags;
  int n1, n2, tag;
  while (in >> n1 >> n2 >> tag) tags.push_back({n1, n2, tag});

  mesh.topo = build_topology(mesh.x, std::move(cells));
  set_boundary_tags(mesh.topo, tags);
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path);
  char line[128];
  out << "nodes " << mesh.topo.n_nodes << " cells " << mesh.topo.n_cells() << " dim 2\n";
  for (const vec2& p : mesh.x) {
    std::snprintf(line, sizeof line, "%.17g %.17g\n", p.x, p.y);
    out << line;
  }
  for (const auto& cl : mesh.topo.cells)
    out << cl[0] << " " << cl[1] << " " << cl[2] << "\n";
  for (int f : mesh.topo.boundary_faces)
    if (mesh.topo.face_tag[f] != 0)
      out << mesh.topo.face_nodes[f][0] << " " << mesh.topo.face_nodes[f][1] << " "
          << mesh.topo.face_tag[f] << "\n";
}

Mesh read_msh_v2(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open msh file " + path);

  std::unordered_map<long, int> node_index;
  Mesh mesh;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 3>> tags;

  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::getline(in, line);
      std::istringstream ls(line);
      double version = 0;
      ls >> version;
      if (version < 2.0 || version >= 3.0)
        throw std::runtime_error(path + ": expected msh format 2.x, got " + line);
    } else if (line.rfind("$Nodes", 0) == 0) {
      int n = 0;
      in >> n;
      for (int k = 0; k < n; k++) {
        long id;
        double x, y, z;
        in >> id >> x >> y >> z;
        node_index[id] = static_cast<int>(mesh.x.size());
        mesh.x.push_back({x, y});
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      int n = 0;
      in >> n;
      for (int k = 0; k < n; k++) {
        long id;
        int type, ntags;
        in >> id >> type >> ntags;
        int physical = 0;
        for (int t = 0; t < ntags; t++) {
          int tag;
          in >> tag;
          if (t == 0) physical = tag;
        }
        auto node = [&](void) {
          long nid;
          in >> nid;
          auto it = node_index.find(nid);
          if (it == node_index.end())
            throw std::runtime_error(path + ": element references unknown node " +
                                     std::to_string(nid));
          return it->second;
        };
        if (type == 1) {
          int u = node(), w = node();
          tags.push_back({u, w, physical});
        } else if (type == 2) {
          int a = node(), b = node(), c = node();
          cells.push_back({a, b, c});
        } else if (type == 15) {
          node();
        } else {
          throw std::runtime_error(path + ": unsupported element type " +
                                   std::to_string(type));
        }
      }
      if (!in) throw std::runtime_error(path + ": truncated $Elements section");
    }
  }
  if (cells.empty()) throw std::runtime_error(path + ": no triangles found");

  mesh.topo = build_topology(mesh.x, std::move(cells));
  set_boundary_tags(mesh.topo, tags);
  return mesh;
}

}  // namespace lagfv
