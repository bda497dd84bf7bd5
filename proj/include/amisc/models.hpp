#pragma once

/// \file
/// Algebraic test ensembles.

#include <cmath>
#include <numbers>
#include <vector>

#include "amisc/ensemble.hpp"
#include "amisc/errors.hpp"

namespace amisc::models {

/// f_a(z) = cos(pi/2 * (z + 4/5 + eps_a)); one input, one QoI.
inline ModelEnsemble cosine_ladder(std::vector<double> eps = {1.0 / 5, 1.0 / 10, 1.0 / 20},
                                   std::vector<double> costs = {}) {
  if (eps.empty()) throw ValidationError("cosine ladder needs at least one level");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] < 0.0) throw ValidationError("ladder offsets must be non-negative");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ValidationError("ladder offsets must be strictly decreasing");
  }
  if (costs.empty())
    for (std::size_t i = 0; i < eps.size(); ++i) costs.push_back(std::ldexp(1.0, static_cast<int>(i)));
  if (costs.size() != eps.size()) throw ValidationError("one cost per ladder level is required");

  ModelEnsemble e;
  e.name = "cosine_ladder";
  e.n_alpha = 1;
  e.n_z = 1;
  e.n_qoi = 1;
  e.alpha_bounds = MultiIndex{static_cast<int>(eps.size()) - 1};
  e.variable_ranges = {{-1.0, 1.0}};
  e.evaluate = [eps](const MultiIndex& a, std::span<const double> z) {
    return std::vector<double>{std::cos(std::numbers::pi / 2 * (z[0] + 0.8 + eps.at(static_cast<std::size_t>(a[0]))))};
  };
  e.cost = [costs](const MultiIndex& a) { return costs.at(static_cast<std::size_t>(a[0])); };
  return e;
}

/// Exact limit of the ladder, cos(pi/2 * (z + 4/5)).
inline double cosine_ladder_truth(double z) { return std::cos(std::numbers::pi / 2 * (z + 0.8)); }

/// f(z) = cos(2 pi z_1) cos(pi z_2), single fidelity.
inline ModelEnsemble cosine_2d() {
  ModelEnsemble e;
  e.name = "cosine_2d";
  e.n_alpha = 1;
  e.n_z = 2;
  e.n_qoi = 1;
  e.alpha_bounds = MultiIndex{0};
  e.variable_ranges = {{-1.0, 1.0}, {-1.0, 1.0}};
  e.evaluate = [](const MultiIndex&, std::span<const double> z) {
    return std::vector<double>{std::cos(2 * std::numbers::pi * z[0]) * std::cos(std::numbers::pi * z[1])};
  };
  e.cost = [](const MultiIndex&) { return 1.0; };
  return e;
}

/// f(z) = sum_i a_i z_i, single fidelity.
inline ModelEnsemble linear(std::vector<double> coefficients) {
  if (coefficients.empty()) throw ValidationError("linear model needs at least one coefficient");
  ModelEnsemble e;
  e.name = "linear";
  e.n_alpha = 1;
  e.n_z = coefficients.size();
  e.n_qoi = 1;
  e.alpha_bounds = MultiIndex{0};
  e.variable_ranges.assign(e.n_z, {-1.0, 1.0});
  e.evaluate = [coefficients](const MultiIndex&, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i) s += coefficients[i] * z[i];
    return std::vector<double>{s};
  };
  e.cost = [](const MultiIndex&) { return 1.0; };
  return e;
}

}  // namespace amisc::models
