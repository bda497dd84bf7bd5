#pragma once

/// \file
/// Transient advection-diffusion on [0,1]^2 with a Karhunen-Loeve-type random
/// diffusivity, solved by centered finite differences and backward Euler.
///
///   du/dt + du/dx1 + du/dx2 - div(k grad u) = (1.5 + cos(2 pi t)) cos(x1),
///   u = 0 on the boundary, u(., 0) = 0, t in [0, 1].
///
/// Fidelity alpha = (a1, a2, a3): h_j = h_0 2^{-a_j}, dt = dt_0 2^{-a3}.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "amisc/ensemble.hpp"
#include "amisc/errors.hpp"

namespace amisc::models {

struct AdvectionDiffusionConfig {
  int n_kle = 10;
  double correlation_length = 0.5;
  double base_mesh = 0.25;
  double base_dt = 0.25;
  /// Finest level per fidelity dimension; alpha_j in [0, max_level].
  int max_level = 6;
  double qoi_center_x1 = 0.3;
  double qoi_center_x2 = 0.5;
  double qoi_width = 0.16;
  double final_time = 1.0;

  void validate() const {
    if (n_kle < 1) throw ValidationError("n_kle must be at least 1");
    if (!(correlation_length > 0 && base_mesh > 0 && base_dt > 0 && qoi_width > 0 && final_time > 0))
      throw ValidationError("advection-diffusion parameters must be positive");
    if (max_level < 0) throw ValidationError("max_level must be non-negative");
  }
};

/// k(x, z) = 0.5 + exp(1 + z_1 (sqrt(pi L)/2)^{1/2} + sum_{k>=2} lambda_k phi_k(x_1) z_k)
/// with physical z (entries in [-sqrt 3, sqrt 3]). Depends on x_1 only.
inline double kle_diffusivity(double x1, std::span<const double> z, const AdvectionDiffusionConfig& cfg) {
  const double lp = std::max(1.0, 2.0 * cfg.correlation_length);
  const double l = cfg.correlation_length / lp;
  const double root = std::sqrt(std::sqrt(std::numbers::pi * l));
  double expo = 1.0 + z[0] * std::sqrt(std::sqrt(std::numbers::pi * l) / 2.0);
  for (std::size_t k = 2; k <= z.size(); ++k) {
    const double half = static_cast<double>(k / 2);
    const double lambda = root * std::exp(-std::pow(half * std::numbers::pi * l, 2) / 4.0);
    const double arg = half * std::numbers::pi * x1 / lp;
    const double phi = (k % 2 == 0) ? std::sin(arg) : std::cos(arg);
    expo += lambda * phi * z[k - 1];
  }
  return 0.5 + std::exp(expo);
}

/// KLE eigenvalue lambda_k, k >= 2.
inline double kle_eigenvalue(int k, const AdvectionDiffusionConfig& cfg) {
  const double lp = std::max(1.0, 2.0 * cfg.correlation_length);
  const double l = cfg.correlation_length / lp;
  return std::sqrt(std::sqrt(std::numbers::pi * l)) *
         std::exp(-std::pow(static_cast<double>(k / 2) * std::numbers::pi * l, 2) / 4.0);
}

inline double advection_forcing(double x1, double t) {
  return (1.5 + std::cos(2.0 * std::numbers::pi * t)) * std::cos(x1);
}

namespace detail {

/// Square banded matrix with half-bandwidth b, LU-factored in place without
/// pivoting. The backward-Euler operator is diagonally dominant, so no
/// pivoting is needed.
class BandedLu {
 public:
  BandedLu(std::size_t n, std::size_t b) : n_(n), b_(b), w_(2 * b + 1), a_(n * (2 * b + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * w_ + (c + b_ - r)]; }

  void factor() {
    for (std::size_t k = 0; k < n_; ++k) {
      const double pivot = at(k, k);
      if (!(std::abs(pivot) > 0.0) || !std::isfinite(pivot)) throw Error("singular banded system");
      const std::size_t last = std::min(n_ - 1, k + b_);
      for (std::size_t r = k + 1; r <= last; ++r) {
        double& lrk = at(r, k);
        if (lrk == 0.0) continue;
        lrk /= pivot;
        const double l = lrk;
        double* row_r = &at(r, k + 1);
        const double* row_k = &at(k, k + 1);
        for (std::size_t c = 0; c < last - k; ++c) row_r[c] -= l * row_k[c];
      }
    }
  }

  void solve(std::vector<double>& x) {
    for (std::size_t r = 0; r < n_; ++r) {
      const std::size_t first = r > b_ ? r - b_ : 0;
      double s = x[r];
      for (std::size_t c = first; c < r; ++c) s -= at(r, c) * x[c];
      x[r] = s;
    }
    for (std::size_t r = n_; r-- > 0;) {
      const std::size_t last = std::min(n_ - 1, r + b_);
      double s = x[r];
      for (std::size_t c = r + 1; c <= last; ++c) s -= at(r, c) * x[c];
      x[r] = s / at(r, r);
    }
  }

 private:
  std::size_t n_, b_, w_;
  std::vector<double> a_;
};

}  // namespace detail

/// Solves the PDE for physical inputs `z` at the given mesh/time levels and
/// returns the Gaussian-weighted spatial integral of u(., T), computed by the
/// trapezoidal rule on the solution grid.
inline double advection_diffusion_qoi(int a1, int a2, int a3, std::span<const double> z,
                                      const AdvectionDiffusionConfig& cfg) {
  const long n_int1 = std::lround(1.0 / (cfg.base_mesh * std::ldexp(1.0, -a1)));
  const long n_int2 = std::lround(1.0 / (cfg.base_mesh * std::ldexp(1.0, -a2)));
  const double h1 = 1.0 / static_cast<double>(n_int1), h2 = 1.0 / static_cast<double>(n_int2);
  const double dt = cfg.base_dt * std::ldexp(1.0, -a3);
  const long steps = std::lround(cfg.final_time / dt);
  const std::size_t n1 = static_cast<std::size_t>(n_int1 - 1), n2 = static_cast<std::size_t>(n_int2 - 1);
  const std::size_t n = n1 * n2;
  if (n == 0) throw Error("mesh has no interior nodes");

  // Unknown ordering: the shorter direction varies fastest to minimize the bandwidth.
  const bool x1_fast = n1 <= n2;
  const std::size_t band = x1_fast ? n1 : n2;
  auto id = [&](std::size_t i1, std::size_t i2) { return x1_fast ? i2 * n1 + i1 : i1 * n2 + i2; };

  std::vector<double> k_node(n1), k_left(n1), k_right(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    const double x1 = static_cast<double>(i + 1) * h1;
    k_node[i] = kle_diffusivity(x1, z, cfg);
    k_left[i] = kle_diffusivity(x1 - 0.5 * h1, z, cfg);
    k_right[i] = kle_diffusivity(x1 + 0.5 * h1, z, cfg);
  }

  detail::BandedLu lu(n, band);
  const double inv_h1s = 1.0 / (h1 * h1), inv_h2s = 1.0 / (h2 * h2);
  const double adv1 = 0.5 / h1, adv2 = 0.5 / h2;
  for (std::size_t i2 = 0; i2 < n2; ++i2) {
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const std::size_t r = id(i1, i2);
      lu.at(r, r) = 1.0 / dt + (k_left[i1] + k_right[i1]) * inv_h1s + 2.0 * k_node[i1] * inv_h2s;
      if (i1 > 0) lu.at(r, id(i1 - 1, i2)) = -k_left[i1] * inv_h1s - adv1;
      if (i1 + 1 < n1) lu.at(r, id(i1 + 1, i2)) = -k_right[i1] * inv_h1s + adv1;
      if (i2 > 0) lu.at(r, id(i1, i2 - 1)) = -k_node[i1] * inv_h2s - adv2;
      if (i2 + 1 < n2) lu.at(r, id(i1, i2 + 1)) = -k_node[i1] * inv_h2s + adv2;
    }
  }
  lu.factor();

  std::vector<double> cos_x1(n1);
  for (std::size_t i = 0; i < n1; ++i) cos_x1[i] = std::cos(static_cast<double>(i + 1) * h1);
  std::vector<double> u(n, 0.0);
  for (long s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const double amp = 1.5 + std::cos(2.0 * std::numbers::pi * t);
    for (std::size_t i2 = 0; i2 < n2; ++i2)
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const std::size_t r = id(i1, i2);
        u[r] = u[r] / dt + amp * cos_x1[i1];
      }
    lu.solve(u);
  }

  const double s2 = cfg.qoi_width * cfg.qoi_width;
  const double norm = 1.0 / (2.0 * std::numbers::pi * s2);
  double qoi = 0.0;
  for (std::size_t i2 = 0; i2 < n2; ++i2) {
    const double dx2 = static_cast<double>(i2 + 1) * h2 - cfg.qoi_center_x2;
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      const double dx1 = static_cast<double>(i1 + 1) * h1 - cfg.qoi_center_x1;
      qoi += u[id(i1, i2)] * norm * std::exp(-(dx1 * dx1 + dx2 * dx2) / s2);
    }
  }
  qoi *= h1 * h2;
  if (!std::isfinite(qoi)) throw Error("non-finite solution");
  return qoi;
}

/// Raw cost 2^{a1+2} 2^{a2+2} 2^{a3+2}.
inline double advection_cost(const MultiIndex& alpha) {
  int e = 0;
  for (int a : alpha) e += a + 2;
  return std::ldexp(1.0, e);
}

/// Ensemble over alpha in [0, max_level]^3 with canonical inputs mapped to
/// [-sqrt 3, sqrt 3]. Costs are normalized so the finest declared model costs 1.
inline ModelEnsemble advection_diffusion_ensemble(const AdvectionDiffusionConfig& cfg) {
  cfg.validate();
  ModelEnsemble e;
  e.name = "advection_diffusion";
  e.n_alpha = 3;
  e.n_z = static_cast<std::size_t>(cfg.n_kle);
  e.n_qoi = 1;
  e.alpha_bounds = MultiIndex(3, cfg.max_level);
  e.variable_ranges.assign(e.n_z, {-std::sqrt(3.0), std::sqrt(3.0)});
  const double top_cost = advection_cost(e.alpha_bounds);
  e.evaluate = [cfg, map = e](const MultiIndex& alpha, std::span<const double> z) {
    const std::vector<double> phys = map.to_physical(z);
    try {
      return std::vector<double>{advection_diffusion_qoi(alpha[0], alpha[1], alpha[2], phys, cfg)};
    } catch (const Error& err) {
      throw ModelEvaluationError(alpha.entries(), std::vector<double>(z.begin(), z.end()), err.what());
    }
  };
  e.cost = [top_cost](const MultiIndex& alpha) { return advection_cost(alpha) / top_cost; };
  return e;
}

}  // namespace amisc::models
