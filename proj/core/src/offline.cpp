#include "moldflux/offline.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <mutex>

#include "moldflux/fingerprint.hpp"
#include "moldflux/parallel.hpp"
#include "moldflux/version.hpp"

namespace moldflux {

std::vector<std::int64_t> probe_cells_for(const Mesh& mesh, const SensorArray& sensors) {
  sensors.validate(mesh.geometry);
  std::vector<std::int64_t> cells;
  cells.reserve(sensors.size());
  for (const Vec3& p : sensors.points) cells.push_back(locate_cell(mesh, p));
  return cells;
}

std::string offline_fingerprint(const Mesh& mesh, const PhysicalParams& params,
                                const TimeGrid& grid, const RbfBasis& basis,
                                const SensorArray& sensors, const StepperOptions& stepper) {
  FingerprintBuilder fp;
  fp.add("version", std::string(kVersion));
  fp.add("L", mesh.geometry.L).add("W", mesh.geometry.W).add("H", mesh.geometry.H);
  fp.add("nx", mesh.nx).add("ny", mesh.ny).add("nz", mesh.nz);
  fp.add("k_s", params.k_s).add("rho", params.rho).add("c_p", params.c_p);
  fp.add("h", params.h).add("T_f", params.T_f).add("T_0", params.T_0);
  fp.add("dt", grid.dt).add("f_samp", grid.f_samp);
  fp.add("eta", basis.eta);
  fp.add("tol_lin", stepper.tol_lin);
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    fp.add("sx" + std::to_string(i), sensors.points[i].x);
    fp.add("sy" + std::to_string(i), sensors.points[i].y);
    fp.add("sz" + std::to_string(i), sensors.points[i].z);
  }
  return fp.digest();
}

namespace {

// Interval sub-grid: one measurement interval, steps_per_meas implicit Euler
// steps of length grid.dt.
struct IntervalMarch {
  std::int64_t steps;
  double dt;
};

Trajectory march_basis_problem(const ImplicitEulerStepper& stepper, const IntervalMarch& m,
                               const Field& load) {
  const auto n = static_cast<std::size_t>(stepper.op().n);
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(m.steps) + 1);
  traj.fields.reserve(static_cast<std::size_t>(m.steps) + 1);
  Field T(n, 0.0);
  traj.times.push_back(0.0);
  traj.fields.push_back(T);
  for (std::int64_t s = 1; s <= m.steps; ++s) {
    stepper.step(T, load);
    traj.times.push_back(static_cast<double>(s) * m.dt);
    traj.fields.push_back(T);
  }
  return traj;
}

Trajectory march_derivative_problem(const ImplicitEulerStepper& stepper, const IntervalMarch& m,
                                    const Trajectory& t_phi) {
  const auto n = static_cast<std::size_t>(stepper.op().n);
  if (t_phi.size() != static_cast<std::size_t>(m.steps) + 1) {
    throw InvalidState("solve_derivative_problems: basis trajectory lacks inner snapshots");
  }
  const DiscreteOperator& op = stepper.op();
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(m.steps) + 1);
  traj.fields.reserve(static_cast<std::size_t>(m.steps) + 1);
  Field T(n, 0.0);
  Field b(n);
  traj.times.push_back(0.0);
  traj.fields.push_back(T);
  for (std::int64_t s = 1; s <= m.steps; ++s) {
    // Lagged source -rho*c_p*M*T_phi at the step start; with this choice the
    // discrete ramp superposition telescopes exactly.
    const Field& src = t_phi.fields[static_cast<std::size_t>(s) - 1];
    for (std::size_t i = 0; i < n; ++i) b[i] = -op.rho_cp * op.mass[i] * src[i];
    stepper.step(T, b);
    traj.times.push_back(static_cast<double>(s) * m.dt);
    traj.fields.push_back(T);
  }
  return traj;
}

Field basis_load_vector(const DiscreteOperator& op, const RbfBasis& basis, std::size_t j) {
  Field b(static_cast<std::size_t>(op.n), 0.0);
  for (std::size_t f = 0; f < op.hot.size(); ++f) {
    b[static_cast<std::size_t>(op.hot.cell[f])] -=
        eval_rbf(basis, j, op.hot.center[f]) * op.hot.area[f];
  }
  return b;
}

}  // namespace

std::vector<Trajectory> solve_basis_problems(const Mesh& mesh, const PhysicalParams& params,
                                             const TimeGrid& grid, const RbfBasis& basis,
                                             const OfflineOptions& options) {
  grid.validate();
  basis.validate();
  const DiscreteOperator op = assemble_operators(mesh, params);
  const ImplicitEulerStepper stepper(op, grid.dt, options.stepper);
  const IntervalMarch m{grid.steps_per_meas(), grid.dt};

  std::vector<Trajectory> out(basis.size());
  parallel_for(static_cast<std::int64_t>(basis.size()), options.threads, [&](std::int64_t j) {
    const Field load = basis_load_vector(op, basis, static_cast<std::size_t>(j));
    out[static_cast<std::size_t>(j)] = march_basis_problem(stepper, m, load);
  });
  return out;
}

std::vector<Trajectory> solve_derivative_problems(const Mesh& mesh, const PhysicalParams& params,
                                                  const TimeGrid& grid,
                                                  const std::vector<Trajectory>& t_phi,
                                                  const OfflineOptions& options) {
  grid.validate();
  const DiscreteOperator op = assemble_operators(mesh, params);
  const ImplicitEulerStepper stepper(op, grid.dt, options.stepper);
  const IntervalMarch m{grid.steps_per_meas(), grid.dt};

  std::vector<Trajectory> out(t_phi.size());
  parallel_for(static_cast<std::int64_t>(t_phi.size()), options.threads, [&](std::int64_t j) {
    out[static_cast<std::size_t>(j)] =
        march_derivative_problem(stepper, m, t_phi[static_cast<std::size_t>(j)]);
  });
  return out;
}

DenseMatrix assemble_theta(const std::vector<Field>& finals,
                           const std::vector<std::int64_t>& probe_cells, double scale) {
  DenseMatrix theta(probe_cells.size(), finals.size());
  for (std::size_t j = 0; j < finals.size(); ++j) {
    for (std::size_t i = 0; i < probe_cells.size(); ++i) {
      theta.at(i, j) = scale * finals[j][static_cast<std::size_t>(probe_cells[i])];
    }
  }
  return theta;
}

OfflineData build_offline_data(const Mesh& mesh, const PhysicalParams& params,
                               const TimeGrid& grid, const RbfBasis& basis,
                               const SensorArray& sensors, const OfflineOptions& options) {
  grid.validate();
  basis.validate();
  if (basis.size() != sensors.size()) {
    throw InvalidArgument("build_offline_data: basis/sensor count mismatch");
  }

  OfflineData data;
  data.fingerprint = offline_fingerprint(mesh, params, grid, basis, sensors, options.stepper);
  data.nx = mesh.nx;
  data.ny = mesh.ny;
  data.nz = mesh.nz;
  data.dt = grid.dt;
  data.f_samp = grid.f_samp;
  data.eta = basis.eta;
  data.n_cells = mesh.num_cells();
  data.P = basis.size();
  data.sensor_points = sensors.points;
  data.centers = basis.centers;
  data.probe_cells = probe_cells_for(mesh, sensors);

  const DiscreteOperator op = assemble_operators(mesh, params);
  const ImplicitEulerStepper stepper(op, grid.dt, options.stepper);
  const IntervalMarch m{grid.steps_per_meas(), grid.dt};

  data.t_phi_final.resize(data.P);
  data.t_d_final.resize(data.P);
  if (options.keep_inner_snapshots) {
    data.t_phi_inner.resize(data.P);
    data.t_d_inner.resize(data.P);
  }

  parallel_for(static_cast<std::int64_t>(data.P), options.threads, [&](std::int64_t js) {
    const auto j = static_cast<std::size_t>(js);
    const Field load = basis_load_vector(op, basis, j);
    Trajectory t_phi = march_basis_problem(stepper, m, load);
    Trajectory t_d = march_derivative_problem(stepper, m, t_phi);
    data.t_phi_final[j] = t_phi.fields.back();
    data.t_d_final[j] = t_d.fields.back();
    if (options.keep_inner_snapshots) {
      data.t_phi_inner[j] = std::move(t_phi);
      data.t_d_inner[j] = std::move(t_d);
    }
  });

  data.theta = assemble_theta(data.t_phi_final, data.probe_cells);
  data.theta_d = assemble_theta(data.t_d_final, data.probe_cells, grid.f_samp);
  data.theta_tilde = data.theta;
  for (std::size_t i = 0; i < data.theta_tilde.data.size(); ++i) {
    data.theta_tilde.data[i] += data.theta_d.data[i];
  }
  data.phi = assemble_phi_matrix(basis, op.hot);
  return data;
}

namespace {

constexpr char kArchiveMagic[9] = "MFOA0001";

void write_bytes(std::FILE* f, const void* p, std::size_t bytes) {
  if (std::fwrite(p, 1, bytes, f) != bytes) {
    throw InvalidState("save_offline_archive: short write");
  }
}

void read_bytes(std::FILE* f, void* p, std::size_t bytes) {
  if (std::fread(p, 1, bytes, f) != bytes) {
    throw InvalidState("load_offline_archive: short read");
  }
}

void write_u64(std::FILE* f, std::uint64_t v) { write_bytes(f, &v, sizeof v); }
std::uint64_t read_u64(std::FILE* f) {
  std::uint64_t v = 0;
  read_bytes(f, &v, sizeof v);
  return v;
}
void write_f64(std::FILE* f, double v) { write_bytes(f, &v, sizeof v); }
double read_f64(std::FILE* f) {
  double v = 0;
  read_bytes(f, &v, sizeof v);
  return v;
}
void write_string(std::FILE* f, const std::string& s) {
  write_u64(f, s.size());
  write_bytes(f, s.data(), s.size());
}
std::string read_string(std::FILE* f) {
  const std::uint64_t n = read_u64(f);
  if (n > (1ULL << 20)) throw InvalidState("load_offline_archive: corrupt string length");
  std::string s(n, '\0');
  read_bytes(f, s.data(), n);
  return s;
}
void write_doubles(std::FILE* f, const std::vector<double>& v) {
  write_u64(f, v.size());
  write_bytes(f, v.data(), v.size() * sizeof(double));
}
std::vector<double> read_doubles(std::FILE* f) {
  const std::uint64_t n = read_u64(f);
  if (n > (1ULL << 32)) throw InvalidState("load_offline_archive: corrupt array length");
  std::vector<double> v(n);
  read_bytes(f, v.data(), n * sizeof(double));
  return v;
}
void write_matrix(std::FILE* f, const DenseMatrix& mat) {
  write_u64(f, mat.rows);
  write_u64(f, mat.cols);
  write_bytes(f, mat.data.data(), mat.data.size() * sizeof(double));
}
DenseMatrix read_matrix(std::FILE* f) {
  DenseMatrix mat;
  mat.rows = read_u64(f);
  mat.cols = read_u64(f);
  if (mat.rows > (1ULL << 20) || mat.cols > (1ULL << 20)) {
    throw InvalidState("load_offline_archive: corrupt matrix shape");
  }
  mat.data.resize(mat.rows * mat.cols);
  read_bytes(f, mat.data.data(), mat.data.size() * sizeof(double));
  return mat;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void save_offline_archive(const std::string& path, const OfflineData& data) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw InvalidArgument("save_offline_archive: cannot open " + path);
  write_bytes(f.get(), kArchiveMagic, 8);
  write_string(f.get(), kVersion);
  write_string(f.get(), data.fingerprint);
  write_u64(f.get(), static_cast<std::uint64_t>(data.nx));
  write_u64(f.get(), static_cast<std::uint64_t>(data.ny));
  write_u64(f.get(), static_cast<std::uint64_t>(data.nz));
  write_f64(f.get(), data.dt);
  write_f64(f.get(), data.f_samp);
  write_f64(f.get(), data.eta);
  write_u64(f.get(), static_cast<std::uint64_t>(data.n_cells));
  write_u64(f.get(), data.P);

  write_u64(f.get(), data.sensor_points.size());
  for (const Vec3& p : data.sensor_points) {
    write_f64(f.get(), p.x);
    write_f64(f.get(), p.y);
    write_f64(f.get(), p.z);
  }
  write_u64(f.get(), data.centers.size());
  for (const Vec3& p : data.centers) {
    write_f64(f.get(), p.x);
    write_f64(f.get(), p.y);
    write_f64(f.get(), p.z);
  }
  write_u64(f.get(), data.probe_cells.size());
  for (std::int64_t c : data.probe_cells) write_u64(f.get(), static_cast<std::uint64_t>(c));

  write_matrix(f.get(), data.theta);
  write_matrix(f.get(), data.theta_d);
  write_matrix(f.get(), data.theta_tilde);
  write_matrix(f.get(), data.phi);

  write_u64(f.get(), data.t_phi_final.size());
  for (const Field& field : data.t_phi_final) write_doubles(f.get(), field);
  write_u64(f.get(), data.t_d_final.size());
  for (const Field& field : data.t_d_final) write_doubles(f.get(), field);
}

OfflineData load_offline_archive(const std::string& path,
                                 const std::string& expected_fingerprint) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw InvalidArgument("load_offline_archive: cannot open " + path);
  char magic[8];
  read_bytes(f.get(), magic, 8);
  if (std::memcmp(magic, kArchiveMagic, 8) != 0) {
    throw InvalidState("load_offline_archive: bad magic in " + path);
  }
  OfflineData data;
  const std::string version = read_string(f.get());
  (void)version;
  data.fingerprint = read_string(f.get());
  if (!expected_fingerprint.empty() && data.fingerprint != expected_fingerprint) {
    throw InvalidState("load_offline_archive: fingerprint mismatch (archive " +
                       data.fingerprint + ", expected " + expected_fingerprint + ")");
  }
  data.nx = static_cast<std::int64_t>(read_u64(f.get()));
  data.ny = static_cast<std::int64_t>(read_u64(f.get()));
  data.nz = static_cast<std::int64_t>(read_u64(f.get()));
  data.dt = read_f64(f.get());
  data.f_samp = read_f64(f.get());
  data.eta = read_f64(f.get());
  data.n_cells = static_cast<std::int64_t>(read_u64(f.get()));
  data.P = read_u64(f.get());

  const std::uint64_t ns = read_u64(f.get());
  data.sensor_points.resize(ns);
  for (auto& p : data.sensor_points) {
    p.x = read_f64(f.get());
    p.y = read_f64(f.get());
    p.z = read_f64(f.get());
  }
  const std::uint64_t nc = read_u64(f.get());
  data.centers.resize(nc);
  for (auto& p : data.centers) {
    p.x = read_f64(f.get());
    p.y = read_f64(f.get());
    p.z = read_f64(f.get());
  }
  const std::uint64_t np = read_u64(f.get());
  data.probe_cells.resize(np);
  for (auto& c : data.probe_cells) c = static_cast<std::int64_t>(read_u64(f.get()));

  data.theta = read_matrix(f.get());
  data.theta_d = read_matrix(f.get());
  data.theta_tilde = read_matrix(f.get());
  data.phi = read_matrix(f.get());

  data.t_phi_final.resize(read_u64(f.get()));
  for (auto& field : data.t_phi_final) field = read_doubles(f.get());
  data.t_d_final.resize(read_u64(f.get()));
  for (auto& field : data.t_d_final) field = read_doubles(f.get());
  return data;
}

OfflineData get_or_build_offline(const std::string& cache_dir, const Mesh& mesh,
                                 const PhysicalParams& params, const TimeGrid& grid,
                                 const RbfBasis& basis, const SensorArray& sensors,
                                 const OfflineOptions& options) {
  if (cache_dir.empty()) {
    return build_offline_data(mesh, params, grid, basis, sensors, options);
  }
  const std::string fp = offline_fingerprint(mesh, params, grid, basis, sensors, options.stepper);
  const std::filesystem::path file =
      std::filesystem::path(cache_dir) / ("offline_" + fp + ".bin");
  if (std::filesystem::exists(file)) {
    return load_offline_archive(file.string(), fp);
  }
  OfflineData data = build_offline_data(mesh, params, grid, basis, sensors, options);
  std::filesystem::create_directories(cache_dir);
  save_offline_archive(file.string(), data);
  return data;
}

}  // namespace moldflux
