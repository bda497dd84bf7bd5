#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"

namespace amisc {

/// A hierarchy of models f_alpha(z) -> QoI vector with per-model cost W_alpha.
/// Inputs are canonical, z in [-1,1]^n_z; `variable_ranges` records the affine
/// map to the physical variables each model applies internally.
struct ModelEnsemble {
  using Evaluator = std::function<std::vector<double>(const MultiIndex& alpha, std::span<const double> z)>;
  using CostModel = std::function<double(const MultiIndex& alpha)>;

  std::string name;
  std::size_t n_alpha = 0;
  std::size_t n_z = 1;
  std::size_t n_qoi = 1;
  /// Largest admissible level (inclusive) per fidelity dimension.
  MultiIndex alpha_bounds;
  Evaluator evaluate;
  CostModel cost;
  std::vector<std::pair<double, double>> variable_ranges;

  std::vector<double> to_physical(std::span<const double> z) const {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto [lo, hi] = variable_ranges[i];
      out[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * z[i];
    }
    return out;
  }

  /// The finest declared discretization.
  MultiIndex top_alpha() const { return alpha_bounds; }

  void validate() const {
    if (alpha_bounds.size() != n_alpha) throw ValidationError("alpha bounds do not match n_alpha");
    if (n_z == 0 || n_qoi == 0) throw ValidationError("ensemble needs inputs and outputs");
    if (!evaluate || !cost) throw ValidationError("ensemble is missing an evaluator or cost model");
    if (variable_ranges.size() != n_z) throw ValidationError("variable ranges do not match n_z");
  }
};

/// The ensemble restricted to one discretization; it has no fidelity dimensions.
inline ModelEnsemble fixed_fidelity(const ModelEnsemble& base, MultiIndex alpha) {
  ModelEnsemble out = base;
  out.name = base.name + "@" + alpha.to_string(',');
  out.n_alpha = 0;
  out.alpha_bounds = MultiIndex{};
  out.evaluate = [f = base.evaluate, alpha](const MultiIndex&, std::span<const double> z) { return f(alpha, z); };
  out.cost = [c = base.cost, alpha](const MultiIndex&) { return c(alpha); };
  return out;
}

/// Diagonal hierarchy {(j,...,j) : j = 0..levels-1}.
inline std::vector<MultiIndex> multilevel_model_set(int levels, std::size_t n_alpha) {
  if (levels < 1) throw ValidationError("multilevel hierarchy needs at least one level");
  if (n_alpha < 1) throw ValidationError("multilevel hierarchy needs a fidelity dimension");
  std::vector<MultiIndex> out;
  for (int j = 0; j < levels; ++j) out.emplace_back(n_alpha, j);
  return out;
}

/// The ensemble seen through the diagonal hierarchy: one scalar fidelity
/// dimension whose level j selects the base model (j,...,j).
inline ModelEnsemble multilevel_ensemble(const ModelEnsemble& base, int levels) {
  const auto hierarchy = multilevel_model_set(levels, base.n_alpha);
  for (const auto& a : hierarchy)
    if (!leq(a, base.alpha_bounds)) throw ValidationError("multilevel hierarchy exceeds the ensemble bounds");
  ModelEnsemble out = base;
  out.name = base.name + "/multilevel";
  out.n_alpha = 1;
  out.alpha_bounds = MultiIndex{levels - 1};
  out.evaluate = [f = base.evaluate, hierarchy](const MultiIndex& a, std::span<const double> z) {
    return f(hierarchy.at(static_cast<std::size_t>(a[0])), z);
  };
  out.cost = [c = base.cost, hierarchy](const MultiIndex& a) { return c(hierarchy.at(static_cast<std::size_t>(a[0]))); };
  return out;
}

}  // namespace amisc
