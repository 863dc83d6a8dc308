#include "moldflux/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "moldflux/csv.hpp"

namespace moldflux {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Mesh MeshSpec::build(const Geometry& g) const {
  return build_structured_mesh(g, nx, ny, nz);
}

double MeshSpec::characteristic_size(const Geometry& g) const {
  if (nx <= 0 || ny <= 0 || nz <= 0) throw InvalidArgument("MeshSpec: cell counts must be positive");
  return std::max({g.L / static_cast<double>(nx), g.W / static_cast<double>(ny),
                   g.H / static_cast<double>(nz)});
}

void DiscretizationLadder::validate(const Geometry& g) const {
  g.validate();
  if (meshes.empty()) throw InvalidArgument("DiscretizationLadder: no meshes");
  if (dts.empty()) throw InvalidArgument("DiscretizationLadder: no time steps");
  std::set<std::string> labels;
  for (const MeshSpec& m : meshes) {
    if (m.label.empty()) throw InvalidArgument("DiscretizationLadder: empty mesh label");
    if (!labels.insert(m.label).second) {
      throw InvalidArgument("DiscretizationLadder: duplicate mesh label " + m.label);
    }
  }
  for (std::size_t i = 0; i + 1 < meshes.size(); ++i) {
    // ties allowed: two refinements can share the controlling axis (dy here)
    if (meshes[i].characteristic_size(g) > meshes[i + 1].characteristic_size(g)) {
      throw InvalidArgument("DiscretizationLadder: meshes must be ordered finest to coarsest");
    }
  }
  for (std::size_t j = 0; j < dts.size(); ++j) {
    if (!(dts[j] > 0.0)) throw InvalidArgument("DiscretizationLadder: time steps must be positive");
    if (j > 0 && !(dts[j - 1] < dts[j])) {
      throw InvalidArgument("DiscretizationLadder: time steps must be strictly ascending");
    }
  }
}

double compute_mS(const std::vector<IntervalDiagnostics>& diagnostics) {
  if (diagnostics.empty()) throw InvalidArgument("compute_mS: no diagnostics");
  double sum = 0.0;
  for (const IntervalDiagnostics& d : diagnostics) {
    if (!std::isfinite(d.S1)) return kInf;
    sum += d.S1;
  }
  return sum / static_cast<double>(diagnostics.size());
}

double compute_deltaT(const std::vector<std::vector<Field>>& coarse_trajectories,
                      const Field& coarse_volumes) {
  if (coarse_trajectories.size() < 2) {
    throw InvalidArgument("compute_deltaT: needs at least two discretization setups");
  }
  const std::size_t len = coarse_trajectories.front().size();
  for (const auto& traj : coarse_trajectories) {
    if (traj.size() != len || len == 0) return kInf;
    for (const Field& f : traj) {
      if (f.size() != coarse_volumes.size()) {
        throw InvalidArgument("compute_deltaT: trajectory field size differs from volume weights");
      }
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a + 1 < coarse_trajectories.size(); ++a) {
    for (std::size_t b = a + 1; b < coarse_trajectories.size(); ++b) {
      for (std::size_t k = 0; k < len; ++k) {
        const Field& fa = coarse_trajectories[a][k];
        const Field& fb = coarse_trajectories[b][k];
        double acc = 0.0;
        for (std::size_t c = 0; c < fa.size(); ++c) {
          const double d = fa[c] - fb[c];
          acc += coarse_volumes[c] * d * d;
        }
        const double norm = std::sqrt(acc);
        if (!std::isfinite(norm)) return kInf;
        worst = std::max(worst, norm);
      }
    }
  }
  return worst;
}

double stability_threshold(const Geometry& g, const DiscretizationLadder& ladder) {
  ladder.validate(g);
  return ladder.meshes.back().characteristic_size(g) + ladder.dts.back();
}

NmResult nelder_mead_min(const std::function<double(double)>& f, double u0,
                         const NmOptions& options) {
  if (!(options.lo < options.hi)) throw InvalidArgument("nelder_mead_min: empty box");
  if (!(options.width_tol > 0.0)) throw InvalidArgument("nelder_mead_min: width_tol must be positive");
  if (options.max_evals < 2) throw InvalidArgument("nelder_mead_min: max_evals must be >= 2");

  NmResult r;
  const auto clamp = [&](double u) { return std::min(options.hi, std::max(options.lo, u)); };
  const auto eval = [&](double u) {
    double v = f(u);
    if (!std::isfinite(v)) v = kInf;
    ++r.evals;
    r.trace.emplace_back(u, v);
    return v;
  };

  double a = clamp(u0);
  double b = clamp(u0 + 0.5);
  if (b == a) b = clamp(u0 - 0.5);
  if (b == a) throw InvalidArgument("nelder_mead_min: box narrower than the start simplex");
  double fa = eval(a);
  double fb = eval(b);
  if (fa == kInf && fb == kInf) {
    throw OptimizationFailure("nelder_mead_min: objective non-finite on the start simplex");
  }

  while (r.evals < options.max_evals) {
    // Keep a as the incumbent best; strict comparison keeps it on ties.
    if (fb < fa) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    if (std::abs(b - a) < options.width_tol) break;

    const double reflected = clamp(a + (a - b));
    if (reflected != a && reflected != b && fa < kInf) {
      const double fr = eval(reflected);
      if (fr < fa) {
        const double expanded = clamp(a + 2.0 * (a - b));
        if (expanded != reflected) {
          const double fe = eval(expanded);
          if (fe < fr) {
            b = a; fb = fa;
            a = expanded; fa = fe;
          } else {
            b = a; fb = fa;
            a = reflected; fa = fr;
          }
        } else {
          b = a; fb = fa;
          a = reflected; fa = fr;
        }
        continue;
      }
      if (fr < fb) {
        b = reflected;
        fb = fr;
        continue;
      }
    }
    // Contraction; in one dimension the shrink lands on the same midpoint,
    // so the worst vertex is replaced unconditionally and the width halves.
    const double contracted = a + 0.5 * (b - a);
    fb = eval(contracted);
    b = contracted;
  }

  if (fb < fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  r.u_min = a;
  r.f_min = fa;
  r.on_boundary = std::abs(a - options.lo) < 1e-9 || std::abs(a - options.hi) < 1e-9;
  return r;
}

SelectionResult select_discretization(const Geometry& g, const DiscretizationLadder& ladder,
                                      SelectionEvaluator& evaluator,
                                      const SelectionOptions& options) {
  ladder.validate(g);
  if (!(options.p_g_init > 0.0)) {
    throw InvalidArgument("select_discretization: p_g_init must be positive");
  }
  const std::size_t nd = ladder.dts.size();
  const std::size_t n_cfg = ladder.num_configs();
  const double threshold = stability_threshold(g, ladder);
  const double p_hi = std::pow(10.0, options.nm.hi);

  SelectionResult result;
  std::size_t evals = 0;

  const auto eval_all = [&](double p_g, bool want_traj) {
    std::vector<EvalOutcome> out(n_cfg);
    for (std::size_t i = 0; i < ladder.meshes.size(); ++i) {
      for (std::size_t j = 0; j < nd; ++j) {
        out[i * nd + j] = evaluator.evaluate({i, j, p_g, want_traj});
        ++evals;
      }
    }
    return out;
  };
  const auto pick_argmin = [&](const std::vector<EvalOutcome>& out) {
    std::size_t best = n_cfg;
    double best_val = kInf;
    for (std::size_t idx = 0; idx < n_cfg; ++idx) {
      if (out[idx].m_S < best_val) {
        best_val = out[idx].m_S;
        best = idx;
      }
    }
    if (best == n_cfg) {
      throw OptimizationFailure("select_discretization: every configuration diverged");
    }
    return best;
  };
  const auto log_trace = [&](int iter, const std::vector<EvalOutcome>& out, double p_g,
                             std::size_t picked) {
    for (std::size_t i = 0; i < ladder.meshes.size(); ++i) {
      for (std::size_t j = 0; j < nd; ++j) {
        const std::size_t idx = i * nd + j;
        result.trace.push_back(
            {iter, ladder.meshes[i].label, ladder.dts[j], p_g, out[idx].m_S, idx == picked});
      }
    }
  };

  // Phase 1: raise the penalty tenfold until every configuration tells the
  // same story within the discretization tolerance.
  double p_g = options.p_g_init;
  std::vector<EvalOutcome> outcomes;
  bool stable = false;
  for (int bump = 0; bump <= options.max_bumps; ++bump) {
    outcomes = eval_all(p_g, n_cfg > 1);
    // A one-entry ladder has nothing to compare; it is stable by definition.
    double dT = 0.0;
    if (n_cfg > 1) {
      std::vector<std::vector<Field>> trajectories;
      trajectories.reserve(n_cfg);
      for (EvalOutcome& o : outcomes) trajectories.push_back(std::move(o.coarse_trajectory));
      dT = compute_deltaT(trajectories, evaluator.coarse_volumes());
    }
    const bool passed = dT <= threshold;
    result.stability.push_back({p_g, dT, threshold, passed});
    if (passed) {
      stable = true;
      break;
    }
    if (p_g >= p_hi * (1.0 - 1e-12)) break;
    p_g = std::min(p_g * 10.0, p_hi);
  }
  if (!stable) {
    throw OptimizationFailure(
        "select_discretization: trajectories never agreed within the penalty range");
  }

  std::size_t pick = pick_argmin(outcomes);
  log_trace(0, outcomes, p_g, pick);

  // Phase 2: refine log10(p_g) on the picked configuration, then let every
  // configuration compete at the refined penalty; stop when the pick repeats.
  for (int outer = 1; outer <= options.max_outer; ++outer) {
    const std::size_t pi = pick / nd;
    const std::size_t pj = pick % nd;
    const auto objective = [&](double u) {
      const EvalOutcome o = evaluator.evaluate({pi, pj, std::pow(10.0, u), false});
      ++evals;
      return o.m_S;
    };
    const double u0 = std::min(options.nm.hi, std::max(options.nm.lo, std::log10(p_g)));
    const NmResult nm = nelder_mead_min(objective, u0, options.nm);
    const double p_new = std::pow(10.0, nm.u_min);

    const std::vector<EvalOutcome> re = eval_all(p_new, false);
    const std::size_t pick_new = pick_argmin(re);
    log_trace(outer, re, p_new, pick_new);
    p_g = p_new;
    if (pick_new == pick) {
      result.mesh_idx = pi;
      result.dt_idx = pj;
      result.p_g = p_g;
      result.m_S = re[pick_new].m_S;
      result.total_evals = evals;
      return result;
    }
    pick = pick_new;
  }
  throw OptimizationFailure("select_discretization: the picked configuration kept changing");
}

void write_selection_trace(const std::string& path, const SelectionResult& result,
                           const std::vector<std::string>& header_comments) {
  std::vector<std::string> comments = header_comments;
  for (const StabilityRow& s : result.stability) {
    comments.push_back("stability p_g=" + format_full(s.p_g) + " deltaT=" + format_full(s.deltaT) +
                       " threshold=" + format_full(s.threshold) +
                       " passed=" + (s.passed ? "1" : "0"));
  }
  comments.push_back("selected mesh_idx=" + std::to_string(result.mesh_idx) +
                     " dt_idx=" + std::to_string(result.dt_idx) + " p_g=" +
                     format_full(result.p_g) + " m_S=" + format_full(result.m_S));
  CsvWriter csv(path, comments, {"iteration", "mesh", "dt_s", "p_g", "m_S", "picked"});
  for (const TraceRow& row : result.trace) {
    csv.begin_row();
    csv.add(static_cast<long long>(row.iteration));
    csv.add(row.mesh_label);
    csv.add(row.dt);
    csv.add(row.p_g);
    csv.add(row.m_S);
    csv.add(static_cast<long long>(row.picked ? 1 : 0));
    csv.end_row();
  }
}

LadderEvaluator::LadderEvaluator(LadderEvaluatorConfig config, DiscretizationLadder ladder,
                                 MeasurementSeries measurements)
    : config_(std::move(config)),
      ladder_(std::move(ladder)),
      measurements_(std::move(measurements)) {
  ladder_.validate(config_.geometry);
  config_.params.validate();
  measurements_.validate();
  if (!(config_.t_f > 0.0)) throw InvalidArgument("LadderEvaluator: t_f must be positive");
  config_.sensors.validate(config_.geometry);
  eta_ = config_.eta > 0.0 ? config_.eta : default_eta(config_.sensors, config_.geometry);
  meshes_.resize(ladder_.meshes.size());
  coarse_maps_.resize(ladder_.meshes.size());
}

const Mesh& LadderEvaluator::mesh(std::size_t mesh_idx) {
  if (mesh_idx >= meshes_.size()) throw InvalidArgument("LadderEvaluator: mesh index out of range");
  if (!meshes_[mesh_idx]) {
    meshes_[mesh_idx] =
        std::make_unique<Mesh>(ladder_.meshes[mesh_idx].build(config_.geometry));
  }
  return *meshes_[mesh_idx];
}

const OfflineData& LadderEvaluator::offline(std::size_t mesh_idx, std::size_t dt_idx) {
  if (dt_idx >= ladder_.dts.size()) throw InvalidArgument("LadderEvaluator: dt index out of range");
  const auto key = std::make_pair(mesh_idx, dt_idx);
  auto it = offline_.find(key);
  if (it != offline_.end()) return it->second;

  const Mesh& m = mesh(mesh_idx);
  const TimeGrid grid{config_.t_f, ladder_.dts[dt_idx], config_.f_samp};
  grid.validate();
  const RbfBasis basis = make_rbf_basis(config_.sensors, config_.geometry, eta_);
  OfflineOptions oo;
  oo.stepper = config_.stepper;
  oo.threads = config_.threads;
  OfflineData data = get_or_build_offline(config_.cache_dir, m, config_.params, grid, basis,
                                          config_.sensors, oo);
  return offline_.emplace(key, std::move(data)).first->second;
}

const Field& LadderEvaluator::coarse_volumes() {
  if (coarse_volumes_.empty()) {
    const Mesh& cm = mesh(ladder_.meshes.size() - 1);
    coarse_volumes_.assign(static_cast<std::size_t>(cm.num_cells()), cm.cell_volume());
  }
  return coarse_volumes_;
}

const std::vector<std::int64_t>& LadderEvaluator::coarse_map(std::size_t mesh_idx) {
  std::vector<std::int64_t>& map = coarse_maps_.at(mesh_idx);
  if (map.empty()) {
    const Mesh& cm = mesh(ladder_.meshes.size() - 1);
    const Mesh& m = mesh(mesh_idx);
    map.reserve(cm.cell_centers.size());
    for (const Vec3& center : cm.cell_centers) map.push_back(locate_cell(m, center));
  }
  return map;
}

EvalOutcome LadderEvaluator::evaluate(const EvalRequest& request) {
  if (request.mesh_idx >= ladder_.meshes.size() || request.dt_idx >= ladder_.dts.size()) {
    throw InvalidArgument("LadderEvaluator: config index out of range");
  }
  const auto key = std::make_tuple(request.mesh_idx, request.dt_idx, request.p_g);
  auto cached = results_.find(key);
  if (cached != results_.end() &&
      (cached->second.has_trajectory || !request.want_trajectory)) {
    return cached->second.outcome;
  }

  const Mesh& m = mesh(request.mesh_idx);
  const TimeGrid grid{config_.t_f, ladder_.dts[request.dt_idx], config_.f_samp};
  const OfflineData& off = offline(request.mesh_idx, request.dt_idx);

  InverseOptions opts;
  opts.time_basis = config_.time_basis;
  opts.p_g = request.p_g;
  opts.regularizer = config_.regularizer;
  opts.alpha_tsvd = config_.alpha_tsvd;
  opts.stepper = config_.stepper;
  opts.store_fields = request.want_trajectory;

  EvalOutcome out;
  try {
    const InverseSolution sol =
        run_sequential_inversion(m, config_.params, grid, off, measurements_, opts);
    out.m_S = sol.diverged ? kInf : compute_mS(sol.diagnostics);
    if (request.want_trajectory) {
      const std::vector<std::int64_t>& map = coarse_map(request.mesh_idx);
      out.coarse_trajectory.reserve(sol.fields.size());
      for (const Field& f : sol.fields) {
        Field cf(map.size());
        for (std::size_t c = 0; c < map.size(); ++c) {
          cf[c] = f[static_cast<std::size_t>(map[c])];
        }
        out.coarse_trajectory.push_back(std::move(cf));
      }
    }
  } catch (const SolverError&) {
    // Ill-conditioned or non-convergent configs rank worst instead of aborting
    // the search.
    out.m_S = kInf;
    out.coarse_trajectory.clear();
  }
  results_[key] = CacheEntry{out, request.want_trajectory};
  return out;
}

}  // namespace moldflux
