#pragma once

/// Convergence studies, strategy comparison, Sobol reports and output densities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amisc/amisc_driver.hpp"
#include "amisc/combination.hpp"
#include "amisc/pce.hpp"
#include "amisc/studio/config.hpp"
#include "amisc/studio/metrics.hpp"
#include "amisc/tensor_grid.hpp"

namespace amisc::studio {

/// n points uniform on [-1,1]^dim; identical for identical (n, dim, seed).
inline PointSet uniform_samples(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointSet out{dim, {}};
  out.coords.reserve(n * dim);
  for (std::size_t k = 0; k < n * dim; ++k) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.coords.push_back(2.0 * u - 1.0);
  }
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Validation points and reference outputs, stored per QoI.
struct ValidationSet {
  PointSet points;
  std::vector<std::vector<double>> truth;  // [qoi][sample]

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline std::string truth_key(const StudyConfig& cfg, const ModelEnsemble& e) {
  std::ostringstream os;
  os << cfg.model.dump() << '|';
  const MultiIndex a = cfg.truth_alpha ? MultiIndex(*cfg.truth_alpha) : e.top_alpha();
  os << a.to_string(',') << '|' << cfg.seed << '|' << cfg.validation_samples;
  return os.str();
}

inline bool read_truth(const std::filesystem::path& file, const std::string& key, std::size_t n, std::size_t nq,
                       std::vector<std::vector<double>>& truth) {
  std::ifstream in(file);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line) || line != "# " + key) return false;
  truth.assign(nq, std::vector<double>(n));
  for (std::size_t s = 0; s < n; ++s) {
    if (!std::getline(in, line)) return false;
    std::istringstream row(line);
    std::string cell;
    for (std::size_t q = 0; q < nq; ++q) {
      if (!std::getline(row, cell, ',')) return false;
      truth[q][s] = std::strtod(cell.c_str(), nullptr);
    }
  }
  return true;
}

}  // namespace detail

/// Draws the validation points and evaluates the reference model on them. With
/// caching enabled, results are stored under the cache directory keyed by the
/// model description, reference alpha, seed and sample count.
inline ValidationSet make_validation_set(const StudyConfig& cfg, const ModelEnsemble& base, bool use_cache = true) {
  ValidationSet v;
  v.points = uniform_samples(cfg.validation_samples, base.n_z, cfg.seed);
  const std::size_t n = v.points.size(), nq = base.n_qoi;

  const std::string key = detail::truth_key(cfg, base);
  std::filesystem::path file;
  if (use_cache) {
    std::ostringstream name;
    name << "truth-" << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key) << ".csv";
    file = std::filesystem::path(cfg.resolved_cache_dir()) / name.str();
    if (detail::read_truth(file, key, n, nq, v.truth)) return v;
  }

  v.truth.assign(nq, std::vector<double>(n));
  for (std::size_t s = 0; s < n; ++s) {
    const std::vector<double> y = evaluate_truth(base, cfg.model, cfg.truth_alpha, v.points[s]);
    if (y.size() != nq) throw ValidationError("reference model returned the wrong number of QoI");
    for (std::size_t q = 0; q < nq; ++q) v.truth[q][s] = y[q];
  }

  if (use_cache) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    out << "# " << key << '\n';
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t q = 0; q < nq; ++q) out << (q ? "," : "") << format_double(v.truth[q][s]);
      out << '\n';
    }
  }
  return v;
}

struct ConvergenceRow {
  double work = 0.0;
  std::size_t steps = 0;
  std::size_t evaluations = 0;
  std::vector<double> error;  // relative L-infinity error per QoI
};

struct StudyResult {
  std::string strategy;
  std::size_t n_qoi = 1;
  std::vector<ConvergenceRow> convergence;
  std::vector<TraceRow> trace;
  MiscSurrogate surrogate;
  std::map<MultiIndex, AllocationEntry> allocation;
};

inline void write_study_outputs(const std::filesystem::path& dir, const StudyResult& r);

/// Runs AMISC for one strategy and records the validation error at
/// geometrically spaced work checkpoints (plus the first and last step).
/// Surrogate values at the validation points are updated incrementally from
/// the coefficient changes of each step.
/// If a model evaluation fails and `flush_dir` is set, the partial trace is
/// written there before the error propagates.
inline StudyResult convergence_study(const StudyConfig& cfg, const std::string& strategy, const ModelEnsemble& base,
                                     const ValidationSet& validation, const std::filesystem::path& flush_dir = {}) {
  const ModelEnsemble ens = strategy_ensemble(base, strategy);
  const std::size_t nq = ens.n_qoi, n = validation.size();
  std::vector<std::vector<double>> values(nq, std::vector<double>(n, 0.0));

  StudyResult result;
  result.strategy = strategy;
  result.n_qoi = nq;
  double next_checkpoint = 0.0;

  AmiscDriver driver(ens, cfg.amisc_options());
  auto on_step = [&](const AmiscDriver& d, const TraceRow& row) {
    for (const auto& [idx, dc] : d.last_changes()) {
      const TensorComponent& comp = d.surrogate().component(idx);
      for (std::size_t s = 0; s < n; ++s) {
        const std::vector<double> y = comp.evaluate(validation.points[s]);
        for (std::size_t q = 0; q < nq; ++q) values[q][s] += dc * y[q];
      }
    }
    const double work = row.cumulative_work;
    if (row.step == 1 || work >= next_checkpoint || d.done()) {
      ConvergenceRow c{work, row.step, d.evaluation_count(), {}};
      for (std::size_t q = 0; q < nq; ++q) c.error.push_back(relative_linf_error(validation.truth[q], values[q]));
      result.convergence.push_back(std::move(c));
      next_checkpoint = std::max(next_checkpoint, work) * cfg.checkpoint_ratio;
      if (next_checkpoint <= work) next_checkpoint = std::nextafter(work, INFINITY);
    }
  };
  auto finish = [&] {
    result.trace = driver.trace();
    result.surrogate = driver.surrogate();
    if (!result.surrogate.empty()) result.allocation = allocation_profile(result.surrogate, ens.cost);
  };
  try {
    driver.run(on_step);
  } catch (...) {
    if (!flush_dir.empty()) {
      finish();
      write_study_outputs(flush_dir, result);
    }
    throw;
  }
  finish();
  return result;
}

inline void write_convergence_csv(std::ostream& os, const StudyResult& r, bool with_strategy = false) {
  for (const auto& c : r.convergence) {
    if (with_strategy) os << r.strategy << ',';
    os << format_double(c.work) << ',' << c.steps << ',' << c.evaluations;
    for (double e : c.error) os << ',' << format_double(e);
    os << '\n';
  }
}

inline void write_convergence_header(std::ostream& os, std::size_t n_qoi, bool with_strategy = false) {
  if (with_strategy) os << "strategy,";
  os << "work,steps,evaluations";
  for (std::size_t q = 0; q < n_qoi; ++q) os << ",error_q" << q;
  os << '\n';
}

inline void write_allocation_csv(std::ostream& os, const std::map<MultiIndex, AllocationEntry>& allocation) {
  os << "alpha,samples,work_fraction\n";
  for (const auto& [alpha, e] : allocation)
    os << alpha.to_string(';') << ',' << e.samples << ',' << format_double(e.work_fraction) << '\n';
}

/// Writes trace, convergence, allocation and index-set files for one strategy.
inline void write_study_outputs(const std::filesystem::path& dir, const StudyResult& r) {
  std::filesystem::create_directories(dir);
  const std::string s = r.strategy;
  {
    std::ofstream os(dir / ("trace_" + s + ".csv"));
    write_trace_csv(os, r.trace, r.n_qoi);
  }
  {
    std::ofstream os(dir / ("convergence_" + s + ".csv"));
    write_convergence_header(os, r.n_qoi);
    write_convergence_csv(os, r);
  }
  {
    std::ofstream os(dir / ("allocation_" + s + ".csv"));
    write_allocation_csv(os, r.allocation);
  }
  {
    std::ofstream os(dir / ("index_set_" + s + ".txt"));
    write_index_set(os, r.surrogate.accepted(), &r.surrogate.coefficients());
  }
}

/// One study for cfg.strategy; writes its files to cfg.out_dir.
inline StudyResult run_study(const StudyConfig& cfg) {
  const ModelEnsemble base = make_ensemble(cfg.model);
  const ValidationSet validation = make_validation_set(cfg, base);
  StudyResult r = convergence_study(cfg, cfg.strategy, base, validation, cfg.out_dir);
  write_study_outputs(cfg.out_dir, r);
  return r;
}

/// One study per strategy on a shared validation set; writes per-strategy files
/// and a merged compare.csv.
inline std::vector<StudyResult> compare_strategies(const StudyConfig& cfg, const std::vector<std::string>& strategies) {
  const ModelEnsemble base = make_ensemble(cfg.model);
  const ValidationSet validation = make_validation_set(cfg, base);
  std::vector<StudyResult> results;
  const std::filesystem::path dir(cfg.out_dir);
  for (const auto& s : strategies) results.push_back(convergence_study(cfg, s, base, validation, dir));

  for (const auto& r : results) write_study_outputs(dir, r);
  std::ofstream os(dir / "compare.csv");
  write_convergence_header(os, base.n_qoi, true);
  for (const auto& r : results) write_convergence_csv(os, r, true);
  return results;
}

struct SobolRow {
  VariableSubset subset;
  std::vector<double> index;  // per QoI
};

/// Sobol indices of the surrogate for the smallest set of variable subsets
/// (largest first) whose partial variances cover `coverage` of the total.
/// Returns an empty table when the surrogate variance vanishes.
inline std::vector<SobolRow> sobol_table(const PceExpansion& pce, double coverage = 0.999) {
  const auto parts = partial_variances(pce);
  const Moments m = pce_mean_var(pce);
  for (bool z : zero_variance(pce))
    if (z) return {};
  std::vector<SobolRow> rows;
  for (const auto& [subset, pv] : parts) {
    SobolRow r{subset, {}};
    for (std::size_t q = 0; q < pce.n_qoi; ++q) r.index.push_back(pv[q] / m.variance[q]);
    rows.push_back(std::move(r));
  }
  auto weight = [](const SobolRow& r) { return *std::max_element(r.index.begin(), r.index.end()); };
  std::stable_sort(rows.begin(), rows.end(), [&](const SobolRow& a, const SobolRow& b) { return weight(a) > weight(b); });

  std::vector<SobolRow> out;
  std::vector<double> covered(pce.n_qoi, 0.0);
  for (auto& r : rows) {
    if (std::all_of(covered.begin(), covered.end(), [&](double c) { return c >= coverage; })) break;
    for (std::size_t q = 0; q < pce.n_qoi; ++q) covered[q] += r.index[q];
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_sobol_csv(std::ostream& os, const std::vector<SobolRow>& rows, std::size_t n_qoi) {
  os << "subset";
  for (std::size_t q = 0; q < n_qoi; ++q) os << ",index_q" << q;
  os << '\n';
  if (rows.empty()) {
    os << "# surrogate variance is zero; Sobol indices are undefined\n";
    return;
  }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.subset.size(); ++i) os << (i ? ";" : "") << r.subset[i];
    for (double v : r.index) os << ',' << format_double(v);
    os << '\n';
  }
}

/// Builds the surrogate for cfg.strategy (no validation) and writes sobol.csv.
inline std::vector<SobolRow> sobol_report(const StudyConfig& cfg) {
  const ModelEnsemble ens = strategy_ensemble(make_ensemble(cfg.model), cfg.strategy);
  const AmiscResult r = amisc_run(ens, cfg.amisc_options());
  const auto rows = sobol_table(r.surrogate.pce());
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os(std::filesystem::path(cfg.out_dir) / "sobol.csv");
  write_sobol_csv(os, rows, ens.n_qoi);
  return rows;
}

struct DensityRow {
  std::size_t qoi = 0;
  double x = 0.0;
  double density = 0.0;
};

/// KDE of each surrogate output under uniform inputs on a regular grid over the
/// sampled range (padded by three bandwidths).
inline std::vector<DensityRow> surrogate_density(const MiscSurrogate& s, std::size_t n_samples, std::size_t n_points,
                                                 std::uint64_t seed) {
  if (n_samples < 2 || n_points < 2) throw ValidationError("density needs at least two samples and two points");
  const PointSet z = uniform_samples(n_samples, s.n_beta(), seed);
  std::vector<std::vector<double>> out(s.n_qoi(), std::vector<double>(n_samples));
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto y = s.evaluate(z[k]);
    for (std::size_t q = 0; q < s.n_qoi(); ++q) out[q][k] = y[q];
  }
  std::vector<DensityRow> rows;
  for (std::size_t q = 0; q < s.n_qoi(); ++q) {
    const auto [lo_it, hi_it] = std::minmax_element(out[q].begin(), out[q].end());
    const double h = silverman_bandwidth(out[q]);
    const double lo = *lo_it - 3 * h, hi = *hi_it + 3 * h;
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (n_points - 1);
    const auto dens = kde_density(out[q], grid);
    for (std::size_t i = 0; i < n_points; ++i) rows.push_back({q, grid[i], dens[i]});
  }
  return rows;
}

inline std::vector<DensityRow> density_report(const StudyConfig& cfg) {
  const ModelEnsemble ens = strategy_ensemble(make_ensemble(cfg.model), cfg.strategy);
  const AmiscResult r = amisc_run(ens, cfg.amisc_options());
  const auto rows = surrogate_density(r.surrogate, cfg.density_samples, cfg.density_points, cfg.seed + 1);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os(std::filesystem::path(cfg.out_dir) / "density.csv");
  os << "qoi,x,density\n";
  for (const auto& r : rows) os << r.qoi << ',' << format_double(r.x) << ',' << format_double(r.density) << '\n';
  return rows;
}

}  // namespace amisc::studio
