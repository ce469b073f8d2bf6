#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lagfv/driver.hpp"

namespace lagfv {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw config_error("line " + std::to_string(line) + ": not a number: '" + v + "'");
  return d;
}

int to_int(const std::string& v, int line) {
  char* end = nullptr;
  long d = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw config_error("line " + std::to_string(line) + ": not an integer: '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw config_error("line " + std::to_string(line) + ": not a boolean: '" + v + "'");
}

BcKind to_bc_kind(const std::string& v, int line) {
  if (v == "free") return BcKind::free_traction;
  if (v == "traction") return BcKind::traction;
  if (v == "normal_velocity") return BcKind::normal_velocity;
  if (v == "velocity") return BcKind::velocity;
  if (v == "symmetry") return BcKind::symmetry;
  if (v == "fixed") return BcKind::fixed;
  if (v == "contact") return BcKind::contact;
  throw config_error("line " + std::to_string(line) + ": unknown bc kind '" + v + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool header_seen = false;

  RunConfig cfg;
  // section = "" top level, "material", or "bc"
  std::string section;
  int bc_tag = -1;
  BcSpec bc_cur;

  auto flush_bc = [&]() {
    if (section == "bc") cfg.bcs.emplace_back(bc_tag, bc_cur);
  };

  while (std::getline(in, raw)) {
    lineno++;
    std::string line = raw;
    if (!header_seen) {
      if (trim(line) != "# solverconfig v1")
        throw config_error("line 1: expected '# solverconfig v1' header");
      header_seen = true;
      continue;
    }
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("line " + std::to_string(lineno) + ": unterminated section");
      flush_bc();
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "material") {
        section = "material";
        cfg.has_material = true;
      } else if (name.rfind("bc", 0) == 0) {
        section = "bc";
        bc_tag = to_int(trim(name.substr(2)), lineno);
        bc_cur = BcSpec{};
      } else {
        throw config_error("line " + std::to_string(lineno) + ": unknown section [" +
                           name + "]");
      }
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw config_error("line " + std::to_string(lineno) + ": empty key or value");

    if (section == "material") {
      if (key == "rho0")
        cfg.rho0 = to_double(val, lineno);
      else if (key == "E")
        cfg.E = to_double(val, lineno);
      else if (key == "nu")
        cfg.nu = to_double(val, lineno);
      else if (key == "a")
        cfg.mat_a = to_double(val, lineno);
      else if (key == "eos")
        cfg.eos = val;
      else if (key == "gamma")
        cfg.gamma = to_double(val, lineno);
      else if (key == "p_inf")
        cfg.p_inf = to_double(val, lineno);
      else
        throw config_error("line " + std::to_string(lineno) + ": unknown material key '" +
                           key + "'");
    } else if (section == "bc") {
      if (key == "kind")
        bc_cur.kind = to_bc_kind(val, lineno);
      else if (key == "pressure")
        bc_cur.pressure = to_double(val, lineno);
      else if (key == "vx")
        bc_cur.v_bc.x = to_double(val, lineno);
      else if (key == "vy")
        bc_cur.v_bc.y = to_double(val, lineno);
      else if (key == "wall_nx")
        bc_cur.wall_n.x = to_double(val, lineno);
      else if (key == "wall_ny")
        bc_cur.wall_n.y = to_double(val, lineno);
      else if (key == "wall_b")
        bc_cur.wall_b = to_double(val, lineno);
      else if (key == "eps_d")
        bc_cur.eps_d = to_double(val, lineno);
      else
        throw config_error("line " + std::to_string(lineno) + ": unknown bc key '" +
                           key + "'");
    } else {
      if (key == "testcase")
        cfg.testcase = val;
      else if (key == "mesh")
        cfg.mesh_path = val;
      else if (key == "nx")
        cfg.nx = to_int(val, lineno);
      else if (key == "ny")
        cfg.ny = to_int(val, lineno);
      else if (key == "pattern")
        cfg.pattern = val;
      else if (key == "t_final")
        cfg.t_final = to_double(val, lineno);
      else if (key == "max_steps")
        cfg.max_steps = to_int(val, lineno);
      else if (key == "v0x") {
        cfg.v0.x = to_double(val, lineno);
        cfg.has_v0 = true;
      } else if (key == "v0y") {
        cfg.v0.y = to_double(val, lineno);
        cfg.has_v0 = true;
      } else if (key == "cfl_v")
        cfg.cfl_v = to_double(val, lineno);
      else if (key == "cfl_acoustic")
        cfg.cfl_acoustic = to_double(val, lineno);
      else if (key == "cfl_increase")
        cfg.cfl_increase = to_double(val, lineno);
      else if (key == "cascade")
        cfg.cascade = val;
      else if (key == "delta0")
        cfg.crit.delta0 = to_double(val, lineno);
      else if (key == "delta1")
        cfg.crit.delta1 = to_double(val, lineno);
      else if (key == "check_involution")
        cfg.crit.check_involution = to_bool(val, lineno);
      else if (key == "diag")
        cfg.diag_path = val;
      else if (key == "output_prefix")
        cfg.output_prefix = val;
      else if (key == "output_every")
        cfg.output_every = to_int(val, lineno);
      else
        throw config_error("line " + std::to_string(lineno) + ": unknown key '" + key +
                           "'");
    }
  }
  if (!header_seen) throw config_error("empty config: expected '# solverconfig v1'");
  flush_bc();

  if (cfg.cascade != "three_level" && cfg.cascade != "two_level")
    throw config_error("cascade must be three_level or two_level");
  if (cfg.pattern != "split" && cfg.pattern != "cross")
    throw config_error("pattern must be split or cross");
  if (cfg.eos != "neo_hookean" && cfg.eos != "stiffened_gas")
    throw config_error("eos must be neo_hookean or stiffened_gas");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lagfv
