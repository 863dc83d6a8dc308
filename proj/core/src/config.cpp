#include "moldflux/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "moldflux/fingerprint.hpp"
#include "moldflux/version.hpp"

namespace moldflux {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail("config: section '" + section + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail("config: unknown key '" + it.key() + "' in section '" + section + "'");
  }
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(std::string("config: '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(std::string("config: '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(std::string("config: '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> get_num_list(const json& obj, const char* key,
                                 const std::vector<double>& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(std::string("config: '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) fail(std::string("config: '") + key + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

TimeBasis parse_time_basis(const std::string& s) {
  if (s == "constant") return TimeBasis::Constant;
  if (s == "linear") return TimeBasis::Linear;
  fail("config: time basis must be 'constant' or 'linear', got '" + s + "'");
}

Regularizer parse_regularizer(const std::string& s) {
  if (s == "lu") return Regularizer::LU;
  if (s == "tsvd") return Regularizer::TSVD;
  fail("config: regularizer must be 'lu' or 'tsvd', got '" + s + "'");
}

MeshSpec parse_mesh(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return standard_mesh(v.get<std::string>());
    } catch (const InvalidArgument& e) {
      fail("config: " + where + ": " + e.what());
    }
  }
  if (v.is_object()) {
    check_keys(v, where, {"label", "nx", "ny", "nz"});
    MeshSpec m;
    m.label = get_str(v, "label", "custom");
    m.nx = get_int(v, "nx", 0);
    m.ny = get_int(v, "ny", 0);
    m.nz = get_int(v, "nz", 0);
    if (m.nx <= 0 || m.ny <= 0 || m.nz <= 0) {
      fail("config: " + where + ": nx, ny, nz must be positive");
    }
    return m;
  }
  fail("config: " + where + ": mesh must be a standard name or {label, nx, ny, nz}");
}

std::vector<MeshSpec> parse_mesh_list(const json& obj, const char* key,
                                      const std::vector<MeshSpec>& fallback,
                                      const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail("config: " + where + ": '" + key + "' must be an array");
  std::vector<MeshSpec> out;
  for (const json& e : v) out.push_back(parse_mesh(e, where));
  if (out.empty()) fail("config: " + where + ": '" + key + "' must not be empty");
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  mesh = standard_mesh("mesh5");
  sweep_meshes = {mesh};
  sweep_dts = {grid.dt};
  ladder.meshes = {standard_mesh("mesh3"), standard_mesh("mesh4"), standard_mesh("mesh5")};
  ladder.dts = {0.1, 0.2, 0.25, 0.5};
}

SensorArray RunConfig::sensors() const {
  return make_sensor_grid(geometry, sensor_count_x, sensor_count_z, sensor_y);
}

InverseOptions RunConfig::inverse_options() const {
  InverseOptions o;
  o.time_basis = time_basis;
  o.p_g = p_g;
  o.regularizer = regularizer;
  o.alpha_tsvd = alpha_tsvd;
  o.w0 = w0;
  o.stepper = stepper;
  o.lu_condition_limit = lu_condition_limit;
  return o;
}

RunConfig parse_config_json(const std::string& text) {
  RunConfig cfg;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config: malformed JSON: ") + e.what());
  }
  try {
    check_keys(root, "(root)",
               {"geometry", "physics", "time", "mesh", "sensors", "basis", "inverse", "benchmark",
                "selection", "solver", "output", "paths", "seed", "threads"});

    if (root.contains("geometry")) {
      const json& g = root.at("geometry");
      check_keys(g, "geometry", {"L", "W", "H"});
      cfg.geometry.L = get_num(g, "L", cfg.geometry.L);
      cfg.geometry.W = get_num(g, "W", cfg.geometry.W);
      cfg.geometry.H = get_num(g, "H", cfg.geometry.H);
    }
    if (root.contains("physics")) {
      const json& p = root.at("physics");
      check_keys(p, "physics", {"k_s", "rho", "c_p", "h", "T_f", "T_0"});
      cfg.params.k_s = get_num(p, "k_s", cfg.params.k_s);
      cfg.params.rho = get_num(p, "rho", cfg.params.rho);
      cfg.params.c_p = get_num(p, "c_p", cfg.params.c_p);
      cfg.params.h = get_num(p, "h", cfg.params.h);
      cfg.params.T_f = get_num(p, "T_f", cfg.params.T_f);
      cfg.params.T_0 = get_num(p, "T_0", cfg.params.T_0);
    }
    if (root.contains("time")) {
      const json& t = root.at("time");
      check_keys(t, "time", {"t_f", "dt", "f_samp"});
      cfg.grid.t_f = get_num(t, "t_f", cfg.grid.t_f);
      cfg.grid.dt = get_num(t, "dt", cfg.grid.dt);
      cfg.grid.f_samp = get_num(t, "f_samp", cfg.grid.f_samp);
    }
    cfg.truth.t_f = cfg.grid.t_f;
    if (root.contains("mesh")) cfg.mesh = parse_mesh(root.at("mesh"), "mesh");
    if (root.contains("sensors")) {
      const json& s = root.at("sensors");
      check_keys(s, "sensors", {"count_x", "count_z", "y"});
      cfg.sensor_count_x = get_int(s, "count_x", cfg.sensor_count_x);
      cfg.sensor_count_z = get_int(s, "count_z", cfg.sensor_count_z);
      cfg.sensor_y = get_num(s, "y", cfg.sensor_y);
    }
    if (root.contains("basis")) {
      const json& b = root.at("basis");
      check_keys(b, "basis", {"eta", "time_basis", "w0"});
      cfg.eta = get_num(b, "eta", cfg.eta);
      cfg.time_basis = parse_time_basis(get_str(b, "time_basis", "constant"));
      cfg.w0 = get_num_list(b, "w0", cfg.w0);
    }
    if (root.contains("inverse")) {
      const json& i = root.at("inverse");
      check_keys(i, "inverse", {"p_g", "regularizer", "alpha_tsvd", "lu_condition_limit"});
      cfg.p_g = get_num(i, "p_g", cfg.p_g);
      cfg.regularizer = parse_regularizer(get_str(i, "regularizer", "lu"));
      const std::int64_t alpha = get_int(i, "alpha_tsvd", static_cast<std::int64_t>(cfg.alpha_tsvd));
      if (alpha < 0) fail("config: alpha_tsvd must be >= 0");
      cfg.alpha_tsvd = static_cast<std::size_t>(alpha);
      cfg.lu_condition_limit = get_num(i, "lu_condition_limit", cfg.lu_condition_limit);
    }
    if (root.contains("benchmark")) {
      const json& b = root.at("benchmark");
      check_keys(b, "benchmark",
                 {"id", "a", "b", "c", "f_max", "t_f", "meshes", "dts", "p_gs", "bases",
                  "regularizers", "omegas", "noise_samples", "generation_mesh", "generation_dt",
                  "same_grid_generation"});
      cfg.truth.id = static_cast<int>(get_int(b, "id", cfg.truth.id));
      cfg.truth.a = get_num(b, "a", cfg.truth.a);
      cfg.truth.b = get_num(b, "b", cfg.truth.b);
      cfg.truth.c = get_num(b, "c", cfg.truth.c);
      cfg.truth.f_max = get_num(b, "f_max", cfg.truth.f_max);
      cfg.truth.t_f = get_num(b, "t_f", cfg.truth.t_f);
      cfg.truth.k_s = cfg.params.k_s;
      cfg.truth.validate();
      cfg.sweep_meshes = parse_mesh_list(b, "meshes", cfg.sweep_meshes, "benchmark");
      cfg.sweep_dts = get_num_list(b, "dts", {cfg.grid.dt});
      cfg.sweep_p_gs = get_num_list(b, "p_gs", cfg.sweep_p_gs);
      if (b.contains("bases")) {
        cfg.sweep_bases.clear();
        for (const json& e : b.at("bases")) {
          if (!e.is_string()) fail("config: benchmark.bases must contain strings");
          cfg.sweep_bases.push_back(parse_time_basis(e.get<std::string>()));
        }
      }
      if (b.contains("regularizers")) {
        cfg.sweep_regularizers.clear();
        for (const json& e : b.at("regularizers")) {
          if (!e.is_string()) fail("config: benchmark.regularizers must contain strings");
          cfg.sweep_regularizers.push_back(parse_regularizer(e.get<std::string>()));
        }
      }
      cfg.sweep_omegas = get_num_list(b, "omegas", cfg.sweep_omegas);
      cfg.noise_samples = static_cast<int>(get_int(b, "noise_samples", cfg.noise_samples));
      if (b.contains("generation_mesh")) {
        cfg.generation_mesh = parse_mesh(b.at("generation_mesh"), "benchmark.generation_mesh");
      }
      cfg.generation_dt = get_num(b, "generation_dt", cfg.generation_dt);
      cfg.same_grid_generation = get_bool(b, "same_grid_generation", cfg.same_grid_generation);
    } else {
      cfg.truth.k_s = cfg.params.k_s;
    }
    if (root.contains("selection")) {
      const json& s = root.at("selection");
      check_keys(s, "selection", {"meshes", "dts", "p_g_init", "max_bumps", "max_outer", "nm"});
      cfg.ladder.meshes = parse_mesh_list(s, "meshes", cfg.ladder.meshes, "selection");
      cfg.ladder.dts = get_num_list(s, "dts", cfg.ladder.dts);
      cfg.selection.p_g_init = get_num(s, "p_g_init", cfg.selection.p_g_init);
      cfg.selection.max_bumps = static_cast<int>(get_int(s, "max_bumps", cfg.selection.max_bumps));
      cfg.selection.max_outer = static_cast<int>(get_int(s, "max_outer", cfg.selection.max_outer));
      if (s.contains("nm")) {
        const json& nm = s.at("nm");
        check_keys(nm, "selection.nm", {"lo", "hi", "width_tol", "max_evals"});
        cfg.selection.nm.lo = get_num(nm, "lo", cfg.selection.nm.lo);
        cfg.selection.nm.hi = get_num(nm, "hi", cfg.selection.nm.hi);
        cfg.selection.nm.width_tol = get_num(nm, "width_tol", cfg.selection.nm.width_tol);
        cfg.selection.nm.max_evals =
            static_cast<int>(get_int(nm, "max_evals", cfg.selection.nm.max_evals));
      }
    }
    if (root.contains("solver")) {
      const json& s = root.at("solver");
      check_keys(s, "solver", {"tol_lin", "max_iter"});
      cfg.stepper.tol_lin = get_num(s, "tol_lin", cfg.stepper.tol_lin);
      cfg.stepper.max_iter = get_int(s, "max_iter", cfg.stepper.max_iter);
    }
    if (root.contains("output")) {
      const json& o = root.at("output");
      check_keys(o, "output", {"dir", "write_vtk"});
      cfg.out_dir = get_str(o, "dir", cfg.out_dir);
      cfg.write_vtk = get_bool(o, "write_vtk", cfg.write_vtk);
    }
    if (root.contains("paths")) {
      const json& p = root.at("paths");
      check_keys(p, "paths", {"cache_dir", "measurements"});
      cfg.cache_dir = get_str(p, "cache_dir", cfg.cache_dir);
      cfg.measurements_path = get_str(p, "measurements", cfg.measurements_path);
    }
    if (root.contains("seed")) {
      const std::int64_t seed = get_int(root, "seed", 0);
      if (seed < 0) fail("config: seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(seed);
    }
    if (root.contains("threads")) {
      cfg.threads = static_cast<int>(get_int(root, "threads", cfg.threads));
      if (cfg.threads < 1) fail("config: threads must be >= 1");
    }
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  }

  try {
    cfg.geometry.validate();
    cfg.params.validate();
    cfg.grid.validate();
  } catch (const InvalidArgument& e) {
    fail(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_fingerprint(const RunConfig& cfg) {
  FingerprintBuilder fp;
  fp.add("version", std::string(kVersion));
  fp.add("L", cfg.geometry.L);
  fp.add("W", cfg.geometry.W);
  fp.add("H", cfg.geometry.H);
  fp.add("k_s", cfg.params.k_s);
  fp.add("rho", cfg.params.rho);
  fp.add("c_p", cfg.params.c_p);
  fp.add("h", cfg.params.h);
  fp.add("T_f", cfg.params.T_f);
  fp.add("T_0", cfg.params.T_0);
  fp.add("t_f", cfg.grid.t_f);
  fp.add("dt", cfg.grid.dt);
  fp.add("f_samp", cfg.grid.f_samp);
  fp.add("mesh", cfg.mesh.label);
  fp.add("nx", cfg.mesh.nx);
  fp.add("ny", cfg.mesh.ny);
  fp.add("nz", cfg.mesh.nz);
  fp.add("count_x", cfg.sensor_count_x);
  fp.add("count_z", cfg.sensor_count_z);
  fp.add("sensor_y", cfg.sensor_y);
  fp.add("eta", cfg.eta);
  fp.add("time_basis", std::string(time_basis_name(cfg.time_basis)));
  for (std::size_t i = 0; i < cfg.w0.size(); ++i) {
    fp.add("w0_" + std::to_string(i), cfg.w0[i]);
  }
  fp.add("p_g", cfg.p_g);
  fp.add("regularizer", std::string(regularizer_name(cfg.regularizer)));
  fp.add("alpha_tsvd", static_cast<std::int64_t>(cfg.alpha_tsvd));
  fp.add("truth_id", static_cast<std::int64_t>(cfg.truth.id));
  fp.add("truth_b", cfg.truth.b);
  fp.add("truth_c", cfg.truth.c);
  fp.add("truth_f_max", cfg.truth.f_max);
  fp.add("truth_t_f", cfg.truth.t_f);
  fp.add("tol_lin", cfg.stepper.tol_lin);
  fp.add("seed", static_cast<std::int64_t>(cfg.seed));
  return fp.digest();
}

}  // namespace moldflux
