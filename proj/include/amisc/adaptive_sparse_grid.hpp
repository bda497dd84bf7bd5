#pragma once

/// \file
/// Dimension-adaptive sparse grid for a single model f(z): the greedy
/// refinement over stochastic indices beta only, with the same indicators,
/// tie-breaking and termination rules as the multi-index driver.

#include <functional>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "amisc/amisc_driver.hpp"
#include "amisc/misc.hpp"

namespace amisc {

struct SparseGridOptions {
  double kappa = 0.5;
  double tau = 0.0;
  double w_max = 0.0;
  std::size_t max_steps = 0;
  int max_level = 8;
};

struct AdaptiveSparseGridResult {
  MiscSurrogate surrogate;
  std::vector<TraceRow> trace;
};

/// Builds an adaptive sparse grid of f : [-1,1]^n_z -> R^n_qoi where each
/// evaluation costs `cost`.
inline AdaptiveSparseGridResult adaptive_sparse_grid(
    const std::function<std::vector<double>(std::span<const double>)>& f, std::size_t n_z, std::size_t n_qoi,
    double cost, const SparseGridOptions& opt) {
  AmiscOptions{opt.kappa, opt.tau, opt.w_max, opt.max_steps, opt.max_level, 1}.validate();
  if (!(cost > 0.0)) throw ValidationError("evaluation cost must be positive");

  MiscSurrogate grid(0, n_z, n_qoi);
  std::unordered_map<std::vector<std::uint64_t>, std::vector<double>, NodeKeyHash> samples;
  std::map<MultiIndex, double> gamma, error, work;
  std::vector<TraceRow> trace;

  auto sample = [&](const MultiIndex& beta) {
    TensorComponent comp(MultiIndex{}, beta, n_qoi);
    std::vector<double> values;
    for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
      std::vector<std::uint64_t> key(n_z);
      std::vector<double> z(n_z);
      for (std::size_t i = 0; i < n_z; ++i) {
        key[i] = cc_node_key(beta[i], j[i]);
        z[i] = cc_rule(beta[i]).nodes[j[i]];
      }
      auto it = samples.find(key);
      if (it == samples.end()) {
        it = samples.emplace(key, f(z)).first;
        grid.add_work(cost);
      }
      values.insert(values.end(), it->second.begin(), it->second.end());
    });
    comp.set_values(std::move(values));
    return comp;
  };

  // Work of a new index: new nodes of the nested rule in every dimension.
  auto new_points = [](const MultiIndex& beta) {
    double n = 1.0;
    for (int b : beta) n *= static_cast<double>(cc_new_node_count(b));
    return n;
  };

  auto enqueue = [&](const MultiIndex& beta) {
    grid.add_candidate(beta, sample(beta));
    const auto [em, ev] = grid.error_indicators(grid.preview(beta));
    RefinementRecord rec{beta, em, ev, cost * new_points(beta), 0.0, 0.0};
    gamma[beta] = indicator_gamma(rec, opt.kappa);
    work[beta] = rec.delta_w;
    error[beta] = gamma[beta] * rec.delta_w;
  };

  const MultiIndex root(n_z);
  {
    TensorComponent center = sample(root);
    grid.set_indicator_scale(center.values());
    grid.add_candidate(root, std::move(center));
    const auto [em, ev] = grid.error_indicators(grid.preview(root));
    RefinementRecord rec{root, em, ev, cost, 0.0, 0.0};
    gamma[root] = indicator_gamma(rec, opt.kappa);
    work[root] = cost;
    error[root] = gamma[root] * cost;
  }

  for (;;) {
    const IndexSet& active = grid.active();
    if (active.empty()) break;
    double pending = 0.0;
    for (const auto& b : active) pending += error[b];
    if (opt.tau > 0.0 && pending <= opt.tau) break;
    if (opt.w_max > 0.0 && grid.work_total() >= opt.w_max) break;
    if (opt.max_steps > 0 && trace.size() >= opt.max_steps) break;

    MultiIndex chosen;
    double top = -1.0;
    for (const auto& b : active)
      if (gamma[b] > top) {
        top = gamma[b];
        chosen = b;
      }

    grid.commit(grid.preview(chosen));
    for (std::size_t k = 0; k < n_z; ++k) {
      if (chosen[k] >= opt.max_level) continue;
      const MultiIndex next = chosen.shifted(k, 1);
      if (is_admissible(grid.accepted(), next)) enqueue(next);
    }
    trace.push_back(TraceRow{trace.size() + 1, chosen, gamma[chosen], work[chosen], grid.work_total(),
                             grid.mean(), grid.variance()});
  }
  return {std::move(grid), std::move(trace)};
}

}  // namespace amisc
