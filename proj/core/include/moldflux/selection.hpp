#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "moldflux/online.hpp"

namespace moldflux {

struct MeshSpec {
  std::string label;
  std::int64_t nx = 0, ny = 0, nz = 0;

  Mesh build(const Geometry& g) const;
  double characteristic_size(const Geometry& g) const;
};

// Candidate discretizations: meshes ordered finest to coarsest by
// characteristic size, time steps ascending.
struct DiscretizationLadder {
  std::vector<MeshSpec> meshes;
  std::vector<double> dts;

  void validate(const Geometry& g) const;
  std::size_t num_configs() const { return meshes.size() * dts.size(); }
};

// Mean of the per-interval data misfits S1, the selection objective.
// Empty or non-finite diagnostics count as +inf (the run diverged).
double compute_mS(const std::vector<IntervalDiagnostics>& diagnostics);

// Largest pairwise trajectory distance, max over measurement instants of the
// volume-weighted L2 norm on the coarse comparison grid.  Trajectories of
// unequal length (a diverged run) give +inf.
double compute_deltaT(const std::vector<std::vector<Field>>& coarse_trajectories,
                      const Field& coarse_volumes);

// Stability tolerance of the bump phase: coarsest characteristic mesh size
// plus largest time step.
double stability_threshold(const Geometry& g, const DiscretizationLadder& ladder);

struct NmOptions {
  double lo = -22.0;
  double hi = -4.0;
  double width_tol = 0.05;
  int max_evals = 50;
};

struct NmResult {
  double u_min = 0.0;
  double f_min = 0.0;
  bool on_boundary = false;
  int evals = 0;
  std::vector<std::pair<double, double>> trace;  // (u, f) per evaluation
};

// One-dimensional Nelder-Mead on the interval [lo, hi]: reflection 1,
// expansion 2, contraction and shrink 0.5, greedy expansion.  Non-finite
// objective values are treated as +inf; ties keep the incumbent vertex.
NmResult nelder_mead_min(const std::function<double(double)>& f, double u0,
                         const NmOptions& options = {});

struct EvalRequest {
  std::size_t mesh_idx = 0;
  std::size_t dt_idx = 0;
  double p_g = 0.0;
  bool want_trajectory = false;
};

struct EvalOutcome {
  double m_S = 0.0;
  // Reconstruction at each tau_k sampled at the coarse comparison centers;
  // filled only on request.
  std::vector<Field> coarse_trajectory;
};

// One inverse run per discretization config; implementations may cache.
class SelectionEvaluator {
 public:
  virtual ~SelectionEvaluator() = default;
  virtual EvalOutcome evaluate(const EvalRequest& request) = 0;
  // Volume weights of the coarse comparison grid the trajectories live on.
  virtual const Field& coarse_volumes() = 0;
};

struct StabilityRow {
  double p_g = 0.0;
  double deltaT = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct TraceRow {
  int iteration = 0;  // 0: stabilized pick, then one per refinement round
  std::string mesh_label;
  double dt = 0.0;
  double p_g = 0.0;
  double m_S = 0.0;
  bool picked = false;
};

struct SelectionOptions {
  double p_g_init = 1e-22;
  int max_bumps = 64;
  NmOptions nm;
  int max_outer = 10;
};

struct SelectionResult {
  std::size_t mesh_idx = 0;
  std::size_t dt_idx = 0;
  double p_g = 0.0;
  double m_S = 0.0;
  std::vector<StabilityRow> stability;
  std::vector<TraceRow> trace;
  std::size_t total_evals = 0;  // evaluator calls issued
};

// Two-phase search: multiply p_g by 10 until all configs agree within the
// stability threshold, pick the misfit argmin, then alternate a 1-D
// Nelder-Mead refinement of log10(p_g) on the picked config with re-picking
// across all configs until the pick repeats.
SelectionResult select_discretization(const Geometry& g, const DiscretizationLadder& ladder,
                                      SelectionEvaluator& evaluator,
                                      const SelectionOptions& options = {});

void write_selection_trace(const std::string& path, const SelectionResult& result,
                           const std::vector<std::string>& header_comments = {});

struct LadderEvaluatorConfig {
  Geometry geometry;
  PhysicalParams params;
  double t_f = 0.0;
  double f_samp = 1.0;
  SensorArray sensors;
  double eta = 0.0;  // 0: spacing-based default
  TimeBasis time_basis = TimeBasis::Linear;
  Regularizer regularizer = Regularizer::LU;
  std::size_t alpha_tsvd = 0;
  StepperOptions stepper;
  std::string cache_dir;  // offline archive cache; empty keeps everything in memory
  int threads = 1;
};

// Production evaluator: meshes and offline datasets built lazily and cached,
// one shared measurement series inverted per (mesh, dt, p_g).  Solver
// failures surface as m_S = +inf so the search ranks them worst.
class LadderEvaluator : public SelectionEvaluator {
 public:
  LadderEvaluator(LadderEvaluatorConfig config, DiscretizationLadder ladder,
                  MeasurementSeries measurements);

  EvalOutcome evaluate(const EvalRequest& request) override;
  const Field& coarse_volumes() override;

  const Mesh& mesh(std::size_t mesh_idx);
  const OfflineData& offline(std::size_t mesh_idx, std::size_t dt_idx);

 private:
  const std::vector<std::int64_t>& coarse_map(std::size_t mesh_idx);

  LadderEvaluatorConfig config_;
  DiscretizationLadder ladder_;
  MeasurementSeries measurements_;
  double eta_ = 0.0;
  std::vector<std::unique_ptr<Mesh>> meshes_;
  std::map<std::pair<std::size_t, std::size_t>, OfflineData> offline_;
  // coarse_maps_[i][c]: cell of mesh i containing coarse cell center c
  std::vector<std::vector<std::int64_t>> coarse_maps_;
  Field coarse_volumes_;
  struct CacheEntry {
    EvalOutcome outcome;
    bool has_trajectory = false;
  };
  std::map<std::tuple<std::size_t, std::size_t, double>, CacheEntry> results_;
};

}  // namespace moldflux
