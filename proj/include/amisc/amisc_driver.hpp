#pragma once

/// \file
/// Greedy adaptive multi-index stochastic collocation.
///
/// Starting from the active set {0}, each step accepts the active index with
/// the largest indicator gamma (ties go to the lexicographically smallest
/// index), updates the combination coefficients, and evaluates and scores the
/// admissible forward neighbors. Candidates are evaluated when they enter the
/// active set, so reported work includes the active set.

#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <ostream>
#include <thread>
#include <unordered_map>
#include <vector>

#include "amisc/ensemble.hpp"
#include "amisc/errors.hpp"
#include "amisc/misc.hpp"
#include "amisc/rules.hpp"
#include "amisc/tensor_grid.hpp"

namespace amisc {

struct AmiscOptions {
  double kappa = 0.5;
  /// Stop once the summed active-set error estimate is <= tau (disabled when 0).
  double tau = 0.0;
  /// Stop once cumulative work reaches w_max (disabled when 0).
  double w_max = 0.0;
  /// Stop after this many accepted indices (disabled when 0).
  std::size_t max_steps = 0;
  /// Largest stochastic level per input dimension.
  int max_stochastic_level = 8;
  /// Workers for evaluating the new points of one candidate.
  unsigned threads = 1;

  void validate() const {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in [0, 1]");
    if (tau < 0.0 || w_max < 0.0) throw ValidationError("tau and w_max must be non-negative");
    if (tau == 0.0 && w_max == 0.0 && max_steps == 0)
      throw ValidationError("at least one stopping criterion (tau, w_max, max_steps) is required");
    if (max_stochastic_level < 0 || max_stochastic_level > kMaxRuleLevel)
      throw ValidationError("max stochastic level out of range");
  }
};

/// One accepted index.
struct TraceRow {
  std::size_t step = 0;
  CombinedIndex index;
  double gamma = 0.0;
  double delta_w = 0.0;
  double cumulative_work = 0.0;
  std::vector<double> mean;
  std::vector<double> variance;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trace_header(std::ostream& os, std::size_t n_qoi) {
  os << "step,index,gamma,delta_w,cumulative_work";
  for (std::size_t q = 0; q < n_qoi; ++q) os << ",mean_" << q;
  for (std::size_t q = 0; q < n_qoi; ++q) os << ",variance_" << q;
  os << '\n';
}

inline void write_trace_row(std::ostream& os, const TraceRow& r) {
  os << r.step << ',' << r.index.to_string(';') << ',' << format_double(r.gamma) << ','
     << format_double(r.delta_w) << ',' << format_double(r.cumulative_work);
  for (double m : r.mean) os << ',' << format_double(m);
  for (double v : r.variance) os << ',' << format_double(v);
  os << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace, std::size_t n_qoi) {
  write_trace_header(os, n_qoi);
  for (const auto& r : trace) write_trace_row(os, r);
}

struct NodeKeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto v : k) h = (h ^ v) * 1099511628211ULL;
    return h;
  }
};

/// W_alpha times the number of points of grid beta not already in the grids
/// of accepted indices with the same alpha.
inline double delta_work(const ModelEnsemble& ensemble, const MiscSurrogate& surrogate, const CombinedIndex& idx) {
  const std::size_t na = surrogate.n_alpha();
  const MultiIndex alpha = alpha_part(idx, na), beta = beta_part(idx, na);
  std::set<std::vector<std::uint64_t>> known;
  for (const auto& acc : surrogate.accepted()) {
    if (alpha_part(acc, na) != alpha) continue;
    const MultiIndex b = beta_part(acc, na);
    for_each_tensor_node(b, [&](const std::vector<std::size_t>& j) {
      std::vector<std::uint64_t> key(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) key[i] = cc_node_key(b[i], j[i]);
      known.insert(std::move(key));
    });
  }
  std::size_t fresh = 0;
  for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
    std::vector<std::uint64_t> key(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) key[i] = cc_node_key(beta[i], j[i]);
    if (!known.contains(key)) ++fresh;
  });
  return ensemble.cost(alpha) * static_cast<double>(fresh);
}

namespace detail {

struct EvaluationFailure {
  std::vector<std::vector<double>> partial;
  std::exception_ptr error;
};

/// Evaluates f at the given points, in parallel when requested, returning the
/// results in input order. On failure the results of the points evaluated so
/// far (a prefix per worker) are kept in `done` and the first error is rethrown.
template <typename Fn>
std::vector<std::vector<double>> evaluate_points(const std::vector<std::vector<double>>& pts, unsigned threads,
                                                 Fn&& f, std::vector<char>& done) {
  std::vector<std::vector<double>> out(pts.size());
  done.assign(pts.size(), false);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pts.size())));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t k = w; k < pts.size(); k += workers) {
        out[k] = f(pts[k]);
        done[k] = true;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) throw EvaluationFailure{std::move(out), e};
  return out;
}

}  // namespace detail

class AmiscDriver {
 public:
  using StepCallback = std::function<void(const AmiscDriver&, const TraceRow&)>;

  AmiscDriver(ModelEnsemble ensemble, AmiscOptions options)
      : ensemble_(std::move(ensemble)), options_(options) {
    ensemble_.validate();
    options_.validate();
    bounds_ = ensemble_.alpha_bounds.concat(MultiIndex(ensemble_.n_z, options_.max_stochastic_level));
    initialize();
  }

  const ModelEnsemble& ensemble() const noexcept { return ensemble_; }
  const AmiscOptions& options() const noexcept { return options_; }
  const MiscSurrogate& surrogate() const noexcept { return surrogate_; }
  const std::vector<TraceRow>& trace() const noexcept { return trace_; }
  const std::map<CombinedIndex, RefinementRecord>& records() const noexcept { return records_; }
  const MultiIndex& bounds() const noexcept { return bounds_; }
  /// Coefficient changes applied by the most recent step.
  const std::vector<std::pair<CombinedIndex, int>>& last_changes() const noexcept { return last_changes_; }
  std::size_t evaluation_count() const noexcept { return evaluations_; }

  /// sum over the active set of gamma * delta_w.
  double global_error_estimate() const {
    double s = 0.0;
    for (const auto& idx : surrogate_.active()) s += records_.at(idx).delta_e;
    return s;
  }

  bool done() const {
    if (surrogate_.active().empty()) return true;
    if (options_.tau > 0.0 && global_error_estimate() <= options_.tau) return true;
    if (options_.w_max > 0.0 && surrogate_.work_total() >= options_.w_max) return true;
    if (options_.max_steps > 0 && trace_.size() >= options_.max_steps) return true;
    return false;
  }

  /// Accepts one index. If a model evaluation throws, nothing is committed
  /// (points that were evaluated stay cached), and step() may be called again.
  const TraceRow& step() {
    if (surrogate_.active().empty()) throw ValidationError("active set is empty");
    const CombinedIndex best = select();
    const InsertionDelta delta = surrogate_.preview(best);

    IndexSet grown = surrogate_.accepted();
    grown.insert(best);
    std::vector<std::pair<CombinedIndex, TensorComponent>> built;
    for (auto& nb : refine_neighbors(grown, best, bounds_)) built.emplace_back(nb, build_component(nb));

    surrogate_.commit(delta);
    last_changes_ = delta.coefficient_changes;
    for (auto& [nb, comp] : built) {
      surrogate_.add_candidate(nb, std::move(comp));
      score(nb);
    }

    const RefinementRecord& rec = records_.at(best);
    trace_.push_back(TraceRow{trace_.size() + 1, best, rec.gamma, rec.delta_w, surrogate_.work_total(),
                              surrogate_.mean(), surrogate_.variance()});
    return trace_.back();
  }

  void run(const StepCallback& on_step = {}) {
    while (!done()) {
      const TraceRow& row = step();
      if (on_step) on_step(*this, row);
    }
  }

 private:
  void initialize() {
    surrogate_ = MiscSurrogate(ensemble_.n_alpha, ensemble_.n_z, ensemble_.n_qoi);
    const CombinedIndex root(ensemble_.n_alpha + ensemble_.n_z);
    TensorComponent comp = build_component(root);
    surrogate_.set_indicator_scale(comp.values());
    surrogate_.add_candidate(root, std::move(comp));
    score(root);
  }

  CombinedIndex select() const {
    const CombinedIndex* best = nullptr;
    double best_gamma = -1.0;
    for (const auto& idx : surrogate_.active()) {
      const double g = records_.at(idx).gamma;
      if (g > best_gamma) {
        best_gamma = g;
        best = &idx;
      }
    }
    return *best;
  }

  void score(const CombinedIndex& idx) {
    const InsertionDelta d = surrogate_.preview(idx);
    auto [em, ev] = surrogate_.error_indicators(d);
    RefinementRecord rec;
    rec.index = idx;
    rec.delta_e_mean = std::move(em);
    rec.delta_e_var = std::move(ev);
    rec.delta_w = delta_work(ensemble_, surrogate_, idx);
    rec.gamma = indicator_gamma(rec, options_.kappa);
    rec.delta_e = rec.gamma * rec.delta_w;
    records_[idx] = std::move(rec);
  }

  TensorComponent build_component(const CombinedIndex& idx) {
    const std::size_t na = ensemble_.n_alpha, nz = ensemble_.n_z, nq = ensemble_.n_qoi;
    const MultiIndex alpha = alpha_part(idx, na), beta = beta_part(idx, na);
    TensorComponent comp(alpha, beta, nq);
    auto& cache = cache_[alpha];

    std::vector<std::vector<std::uint64_t>> keys;
    std::vector<std::vector<double>> missing;
    std::vector<std::size_t> missing_key;
    for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
      std::vector<std::uint64_t> key(nz);
      std::vector<double> z(nz);
      for (std::size_t i = 0; i < nz; ++i) {
        key[i] = cc_node_key(beta[i], j[i]);
        z[i] = cc_rule(beta[i]).nodes[j[i]];
      }
      if (!cache.contains(key)) {
        missing.push_back(std::move(z));
        missing_key.push_back(keys.size());
      }
      keys.push_back(std::move(key));
    });

    const double w = ensemble_.cost(alpha);
    auto f = [&](const std::vector<double>& z) {
      std::vector<double> v = ensemble_.evaluate(alpha, z);
      if (v.size() != nq) throw ModelEvaluationError(alpha.entries(), z, "wrong number of QoI");
      return v;
    };
    std::vector<char> done;
    auto store = [&](std::vector<std::vector<double>>& results) {
      for (std::size_t k = 0; k < missing.size(); ++k) {
        if (!done[k]) continue;
        cache.emplace(keys[missing_key[k]], std::move(results[k]));
        surrogate_.add_work(w);
        ++evaluations_;
      }
    };
    try {
      auto results = detail::evaluate_points(missing, options_.threads, f, done);
      store(results);
    } catch (detail::EvaluationFailure& failure) {
      store(failure.partial);
      std::rethrow_exception(failure.error);
    }

    std::vector<double> values;
    values.reserve(keys.size() * nq);
    for (const auto& key : keys) {
      const auto& v = cache.at(key);
      values.insert(values.end(), v.begin(), v.end());
    }
    comp.set_values(std::move(values));
    return comp;
  }

  ModelEnsemble ensemble_;
  AmiscOptions options_;
  MultiIndex bounds_;
  MiscSurrogate surrogate_;
  std::map<CombinedIndex, RefinementRecord> records_;
  std::vector<TraceRow> trace_;
  std::vector<std::pair<CombinedIndex, int>> last_changes_;
  std::map<MultiIndex, std::unordered_map<std::vector<std::uint64_t>, std::vector<double>, NodeKeyHash>> cache_;
  std::size_t evaluations_ = 0;
};

struct AmiscResult {
  MiscSurrogate surrogate;
  std::vector<TraceRow> trace;
};

inline AmiscResult amisc_run(const ModelEnsemble& ensemble, const AmiscOptions& options,
                             const AmiscDriver::StepCallback& on_step = {}) {
  AmiscDriver driver(ensemble, options);
  driver.run(on_step);
  return {driver.surrogate(), driver.trace()};
}

}  // namespace amisc
