#ifndef LAGFV_OUTPUT_HPP
#define LAGFV_OUTPUT_HPP

#include <fstream>
#include <string>
#include <vector>

#include "lagfv/driver.hpp"

namespace lagfv {

// Shortest round-trip decimal representation of a double.
std::string fmt17(double v);

// Legacy ASCII VTK unstructured-grid snapshot: cell density (geometric),
// pressure and scheme level, node velocities. level may be empty (all cells
// reported at the top scheme).
void write_vtk(const std::string& path, const SimState& s,
               const std::vector<int>& level);

// Per-step diagnostics CSV with a fixed column set.
class DiagWriter {
 public:
  static const char* header();

  explicit DiagWriter(const std::string& path);

  void row(int step, double time, double dt, const std::string& branch,
           const EnergyTotals& totals, double delta_h, int troubled, int n_p0,
           int n_p1bj, int n_p1);

 private:
  std::ofstream out_;
};

}  // namespace lagfv

#endif
