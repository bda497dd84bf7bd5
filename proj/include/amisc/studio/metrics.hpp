#pragma once

/// \file
/// Output statistics: validation error, power-mean aggregation, Gaussian KDE.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "amisc/errors.hpp"

namespace amisc::studio {

/// max_j |f_j - s_j| / (max_j f_j - min_j f_j).
inline double relative_linf_error(std::span<const double> reference, std::span<const double> surrogate) {
  if (reference.size() != surrogate.size()) throw ValidationError("reference and surrogate lengths differ");
  if (reference.size() < 2) throw ValidationError("at least two validation samples are required");
  const auto [lo, hi] = std::minmax_element(reference.begin(), reference.end());
  const double range = *hi - *lo;
  if (!(range > 0.0))
    throw DegenerateSampleError("relative error undefined: reference values are constant (" +
                                std::to_string(*lo) + "), division by zero range");
  double worst = 0.0;
  for (std::size_t j = 0; j < reference.size(); ++j) worst = std::max(worst, std::abs(reference[j] - surrogate[j]));
  return worst / range;
}

/// ((1/N) sum c_i^p)^{1/p}; tends to max c_i as p grows.
inline double pn_aggregate(std::span<const double> values, double p = 10.0) {
  if (values.empty()) throw ValidationError("PN-function needs at least one value");
  if (!(p >= 1.0)) throw ValidationError("PN-function exponent must be at least 1");
  // Factor out the maximum so large p does not overflow.
  double top = 0.0;
  for (double c : values) {
    if (c < 0.0) throw ValidationError("PN-function inputs must be non-negative");
    top = std::max(top, c);
  }
  if (top == 0.0) return 0.0;
  double s = 0.0;
  for (double c : values) s += std::pow(c / top, p);
  return top * std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

/// Silverman's rule 1.06 sigma n^{-1/5}.
inline double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DegenerateSampleError("density estimation needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateSampleError("density estimation needs samples with positive spread");
  return 1.06 * sd * std::pow(n, -0.2);
}

/// Gaussian kernel density estimate at each evaluation point.
inline std::vector<double> kde_density(std::span<const double> samples, std::span<const double> eval_points) {
  const double bw = silverman_bandwidth(samples);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(eval_points.size(), 0.0);
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    double s = 0.0;
    for (double x : samples) {
      const double u = (eval_points[k] - x) / bw;
      s += std::exp(-0.5 * u * u);
    }
    out[k] = s * norm;
  }
  return out;
}

}  // namespace amisc::studio
