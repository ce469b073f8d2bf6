#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "lagfv/driver.hpp"
#include "lagfv/output.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  lagfv::RunConfig cfg = lagfv::load_config(config_path);
  lagfv::RunResult res = lagfv::run(cfg);
  std::printf("testcase        %s\n", cfg.testcase.c_str());
  std::printf("steps           %d\n", res.steps);
  std::printf("t_end           %s\n", lagfv::fmt17(res.t_end).c_str());
  std::printf("delta_h         %s%s\n", lagfv::fmt17(res.delta_h).c_str(),
              res.delta_h_absolute ? " (absolute, E0 = 0)" : "");
  std::printf("troubled/step   %s\n",
              lagfv::fmt17(res.mean_troubled_fraction).c_str());
  std::printf("parachute total %lld\n", res.p0_total);
  std::printf("min entropy     %s\n", lagfv::fmt17(res.min_entropy).c_str());
  if (res.contact_steps || res.release_steps)
    std::printf("contact         %d attach step(s), %d release step(s)\n",
                res.contact_steps, res.release_steps);
  return 0;
}

int cmd_convergence(const std::string& config_path, int levels) {
  lagfv::RunConfig cfg = lagfv::load_config(config_path);
  lagfv::ConvergenceResult res = lagfv::convergence_study(cfg, levels);
  std::printf("%10s %8s %12s %12s %8s %12s %8s %12s %8s\n", "nx", "cells", "Lc_final",
              "err(u)", "ord", "err(Bxx)", "ord", "err(Txx)", "ord");
  for (size_t i = 0; i < res.levels.size(); ++i) {
    const auto& l = res.levels[i];
    if (i == 0)
      std::printf("%10d %8d %12.4e %12.4e %8s %12.4e %8s %12.4e %8s\n", l.nx, l.cells,
                  l.Lc_final, l.err_u, "-", l.err_bxx, "-", l.err_txx, "-");
    else
      std::printf("%10d %8d %12.4e %12.4e %8.2f %12.4e %8.2f %12.4e %8.2f\n", l.nx,
                  l.cells, l.Lc_final, l.err_u, res.orders[i - 1][0], l.err_bxx,
                  res.orders[i - 1][1], l.err_txx, res.orders[i - 1][2]);
  }
  return 0;
}

int cmd_mesh_info(const std::string& mesh_path) {
  lagfv::Mesh mesh =
      mesh_path.size() > 4 && mesh_path.substr(mesh_path.size() - 4) == ".msh"
          ? lagfv::read_msh_v2(mesh_path)
          : lagfv::read_mesh(mesh_path);
  lagfv::MeshGeometry geom = lagfv::compute_geometry(mesh.topo, mesh.x);
  double vol = 0.0;
  for (double v : geom.vol) vol += v;
  std::map<int, int> tags;
  for (int f : mesh.topo.boundary_faces) tags[mesh.topo.face_tag[f]]++;
  std::printf("nodes           %d\n", mesh.topo.n_nodes);
  std::printf("cells           %d\n", mesh.topo.n_cells());
  std::printf("faces           %d\n", mesh.topo.n_faces());
  std::printf("boundary faces  %d\n", static_cast<int>(mesh.topo.boundary_faces.size()));
  std::printf("total area      %s\n", lagfv::fmt17(vol).c_str());
  std::printf("min Lc          %s\n", lagfv::fmt17(geom.min_Lc).c_str());
  for (const auto& [tag, count] : tags)
    std::printf("tag %-4d        %d face(s)\n", tag, count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-centered Lagrangian finite-volume solver for hyperelastic solids"};
  app.require_subcommand(1);

  std::string config_path, mesh_path;
  int levels = 3;

  CLI::App* sub_run = app.add_subcommand("run", "Advance a configured problem to t_final");
  sub_run->add_option("config", config_path, "configuration file")->required();

  CLI::App* sub_conv =
      app.add_subcommand("convergence", "Mesh-refinement error study on an exact solution");
  sub_conv->add_option("config", config_path, "configuration file")->required();
  sub_conv->add_option("--levels", levels, "number of nested resolutions")
      ->check(CLI::PositiveNumber);

  CLI::App* sub_mesh = app.add_subcommand("mesh-info", "Print mesh statistics");
  sub_mesh->add_option("mesh", mesh_path, "mesh file (.mesh plain or .msh gmsh v2)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_run->parsed()) return cmd_run(config_path);
    if (sub_conv->parsed()) return cmd_convergence(config_path, levels);
    if (sub_mesh->parsed()) return cmd_mesh_info(mesh_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
