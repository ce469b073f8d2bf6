#include <cstdio>
#include <stdexcept>

#include "lagfv/output.hpp"

namespace lagfv {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vtk(const std::string& path, const SimState& s,
               const std::vector<int>& level) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open snapshot file: " + path);
  const MeshTopology& topo = s.mesh.topo;
  int nc = topo.n_cells();
  int np = topo.n_nodes;

  out << "# vtk DataFile Version 2.0\n";
  out << "lagfv snapshot t=" << fmt17(s.t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << np << " double\n";
  for (int p = 0; p < np; ++p)
    out << fmt17(s.mesh.x[p].x) << " " << fmt17(s.mesh.x[p].y) << " 0\n";
  out << "CELLS " << nc << " " << 4 * nc << "\n";
  for (const auto& cell : topo.cells)
    out << "3 " << cell[0] << " " << cell[1] << " " << cell[2] << "\n";
  out << "CELL_TYPES " << nc << "\n";
  for (int c = 0; c < nc; ++c) out << "5\n";

  out << "CELL_DATA " << nc << "\n";
  out << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << fmt17(s.mass.m_cell[c] / s.geom.vol[c]) << "\n";
  out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    StressEval ev;
    double eps = s.q[c].e - 0.5 * dot(s.q[c].v, s.q[c].v);
    double p = evaluate_stress(s.mat, s.q[c].B, eps, ev) ? ev.p : 0.0;
    out << fmt17(p) << "\n";
  }
  out << "SCALARS level int 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << (level.empty() ? kP1 : level[c]) << "\n";

  out << "POINT_DATA " << np << "\n";
  out << "VECTORS velocity double\n";
  for (int p = 0; p < np; ++p)
    out << fmt17(s.v_node[p].x) << " " << fmt17(s.v_node[p].y) << " 0\n";
  if (!out) throw std::runtime_error("failed writing snapshot: " + path);
}

const char* DiagWriter::header() {
  return "step,time,dt,branch,mass,momx,momy,energy,kinetic,free,delta_h,troubled,"
         "levelP0,levelP1BJ,levelP1";
}

DiagWriter::DiagWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open diagnostics file: " + path);
  out_ << header() << "\n";
}

void DiagWriter::row(int step, double time, double dt, const std::string& branch,
                     const EnergyTotals& totals, double delta_h, int troubled,
                     int n_p0, int n_p1bj, int n_p1) {
  out_ << step << "," << fmt17(time) << "," << fmt17(dt) << "," << branch << ","
       << fmt17(totals.mass) << "," << fmt17(totals.momx) << "," << fmt17(totals.momy)
       << "," << fmt17(totals.energy) << "," << fmt17(totals.kinetic) << ","
       << fmt17(totals.free_energy) << "," << fmt17(delta_h) << "," << troubled << ","
       << n_p0 << "," << n_p1bj << "," << n_p1 << "\n";
  out_.flush();
}

}  // namespace lagfv
