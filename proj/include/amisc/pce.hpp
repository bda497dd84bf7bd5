#pragma once

/// \file
/// Conversion of Lagrange tensor interpolants (and their combinations) into
/// orthonormal polynomial chaos expansions; moments and Sobol indices.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "amisc/combination.hpp"
#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"
#include "amisc/rules.hpp"
#include "amisc/tensor_grid.hpp"

namespace amisc {

/// Normalized Legendre polynomials sqrt(2k+1) P_k, orthonormal under the
/// uniform probability density on [-1,1].
struct LegendreFamily {
  /// phi_0(x), ..., phi_{n-1}(x).
  static void values(double x, std::span<double> out) {
    const std::size_t n = out.size();
    if (n == 0) return;
    double p_prev = 1.0, p = x;
    out[0] = 1.0;
    if (n > 1) out[1] = std::sqrt(3.0) * x;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double kd = static_cast<double>(k);
      const double p_next = ((2.0 * kd + 1.0) * x * p - kd * p_prev) / (kd + 1.0);
      p_prev = p;
      p = p_next;
      out[k + 1] = std::sqrt(2.0 * kd + 3.0) * p;
    }
  }

  /// n-point Gauss-Legendre rule with weights summing to 1.
  static void gauss(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 1; k < n; ++k) {
          const double kd = static_cast<double>(k);
          const double p2 = ((2.0 * kd + 1.0) * x * p1 - kd * p0) / (kd + 1.0);
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) {
          p1 = x;
          p0 = 1.0;
        }
        dp = nd * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      // Recompute the derivative at the converged root.
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd + 1.0) * x * p1 - kd * p0) / (kd + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = (n == 1) ? 1.0 : nd * (x * p1 - p0) / (x * x - 1.0);
      const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half the standard weight
      nodes[i] = x;
      nodes[n - 1 - i] = -x;
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
  }
};

/// Change of basis for one rule: entry (j, k) is the coefficient of phi_k in
/// the expansion of Lagrange basis polynomial j.
struct UnivariateTransform {
  int level = 0;
  std::size_t m = 0;
  std::vector<double> matrix;  // row-major m x m

  double operator()(std::size_t j, std::size_t k) const { return matrix[j * m + k]; }
};

/// nu_{jk} = integral of l_j * phi_k by an m-point Gauss rule, exact for the
/// degree 2m-2 integrand.
template <typename Family = LegendreFamily>
UnivariateTransform univariate_transform(const UnivariateRule& rule) {
  const std::size_t m = rule.size();
  UnivariateTransform t{rule.level, m, std::vector<double>(m * m, 0.0)};
  std::vector<double> gx, gw;
  Family::gauss(m, gx, gw);
  std::vector<double> lag(m), phi(m);
  for (std::size_t q = 0; q < m; ++q) {
    rule.basis_values(gx[q], lag);
    Family::values(gx[q], phi);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) t.matrix[j * m + k] += gw[q] * lag[j] * phi[k];
  }
  return t;
}

/// Cached Legendre transform of the level-`level` Clenshaw-Curtis rule.
inline const UnivariateTransform& cc_transform(int level) {
  if (level < 0 || level > kMaxRuleLevel) throw ValidationError("rule level out of range");
  static std::array<std::unique_ptr<UnivariateTransform>, kMaxRuleLevel + 1> cache;
  static std::array<std::once_flag, kMaxRuleLevel + 1> flags;
  std::call_once(flags[static_cast<std::size_t>(level)], [level] {
    cache[static_cast<std::size_t>(level)] =
        std::make_unique<UnivariateTransform>(univariate_transform(cc_rule(level)));
  });
  return *cache[static_cast<std::size_t>(level)];
}

/// PCE coefficients of a tensor component as a dense tensor laid out like the
/// grid values: entry (lambda, q) with lambda_i in [0, m_i), dimension 0 slowest.
/// Applies one univariate transform per dimension (mode products).
inline std::vector<double> component_pce_dense(const TensorComponent& comp) {
  const std::size_t d = comp.dim(), nq = comp.n_qoi();
  std::vector<std::size_t> m(d);
  for (std::size_t i = 0; i < d; ++i) m[i] = comp.rule(i).size();
  const auto vals = comp.values();
  std::vector<double> in(vals.begin(), vals.end()), out(in.size());
  std::size_t prefix = 1, suffix = in.size() / nq;
  for (std::size_t i = 0; i < d; ++i) {
    suffix /= m[i];
    const std::size_t inner = suffix * nq;
    const UnivariateTransform& t = cc_transform(comp.beta()[i]);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t p = 0; p < prefix; ++p) {
      const double* src = in.data() + p * m[i] * inner;
      double* dst = out.data() + p * m[i] * inner;
      for (std::size_t j = 0; j < m[i]; ++j) {
        for (std::size_t k = 0; k < m[i]; ++k) {
          const double nu = t(j, k);
          if (nu == 0.0) continue;
          for (std::size_t s = 0; s < inner; ++s) dst[k * inner + s] += nu * src[j * inner + s];
        }
      }
    }
    in.swap(out);
    prefix *= m[i];
  }
  return in;
}

/// Orthonormal expansion sum_lambda eta_lambda phi_lambda(z), per QoI.
struct PceExpansion {
  std::size_t dim = 0;
  std::size_t n_qoi = 1;
  std::map<MultiIndex, std::vector<double>> coefficients;

  std::vector<double> evaluate(std::span<const double> z) const {
    if (z.size() != dim) throw ValidationError("evaluation point has wrong dimension");
    std::size_t kmax = 1;
    for (const auto& [lambda, eta] : coefficients) kmax = std::max<std::size_t>(kmax, lambda.max_entry() + 1);
    std::vector<std::vector<double>> phi(dim, std::vector<double>(kmax));
    for (std::size_t i = 0; i < dim; ++i) LegendreFamily::values(z[i], phi[i]);
    std::vector<double> out(n_qoi, 0.0);
    for (const auto& [lambda, eta] : coefficients) {
      double basis = 1.0;
      for (std::size_t i = 0; i < dim; ++i) basis *= phi[i][static_cast<std::size_t>(lambda[i])];
      for (std::size_t q = 0; q < n_qoi; ++q) out[q] += eta[q] * basis;
    }
    return out;
  }

  void add(const MultiIndex& lambda, std::span<const double> eta, double scale) {
    auto& dst = coefficients.try_emplace(lambda, n_qoi, 0.0).first->second;
    for (std::size_t q = 0; q < n_qoi; ++q) dst[q] += scale * eta[q];
  }
};

/// Adds scale * (PCE of comp) into `out` without forming the per-component map.
inline void accumulate_component_pce(const TensorComponent& comp, double scale, PceExpansion& out) {
  const std::vector<double> eta = component_pce_dense(comp);
  const std::size_t nq = comp.n_qoi();
  std::size_t k = 0;
  for_each_tensor_node(comp.beta(), [&](const std::vector<std::size_t>& j) {
    std::vector<int> lam(j.begin(), j.end());
    out.add(MultiIndex(std::move(lam)), std::span<const double>(eta).subspan(k * nq, nq), scale);
    ++k;
  });
}

inline PceExpansion component_to_pce(const TensorComponent& comp) {
  PceExpansion out{comp.dim(), comp.n_qoi(), {}};
  accumulate_component_pce(comp, 1.0, out);
  return out;
}

/// Linear combination sum_beta c_beta T[f_beta] over the nonzero coefficients.
template <typename ComponentMap>
PceExpansion surrogate_to_pce(const CombinationWeights& weights, const ComponentMap& components) {
  PceExpansion out;
  bool first = true;
  for (const auto& [idx, c] : weights) {
    if (c == 0) continue;
    auto it = components.find(idx);
    if (it == components.end()) throw NotReadyError("missing tensor component for a nonzero coefficient");
    if (first) {
      out.dim = it->second.dim();
      out.n_qoi = it->second.n_qoi();
      first = false;
    }
    accumulate_component_pce(it->second, static_cast<double>(c), out);
  }
  return out;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
};

inline Moments pce_mean_var(const PceExpansion& pce) {
  if (pce.coefficients.empty()) throw ValidationError("empty expansion");
  Moments m{std::vector<double>(pce.n_qoi, 0.0), std::vector<double>(pce.n_qoi, 0.0)};
  for (const auto& [lambda, eta] : pce.coefficients) {
    const bool constant = lambda.l1() == 0;
    for (std::size_t q = 0; q < pce.n_qoi; ++q) {
      if (constant)
        m.mean[q] += eta[q];
      else
        m.variance[q] += eta[q] * eta[q];
    }
  }
  return m;
}

/// True for QoI whose variance is round-off relative to the second moment.
inline std::vector<bool> zero_variance(const PceExpansion& pce) {
  const Moments m = pce_mean_var(pce);
  std::vector<bool> out(pce.n_qoi);
  for (std::size_t q = 0; q < pce.n_qoi; ++q) {
    const double tol = 1e-26 * (m.mean[q] * m.mean[q] + m.variance[q]);
    out[q] = !(m.variance[q] > tol);
  }
  return out;
}

/// Set of input variables (zero-based, ascending).
using VariableSubset = std::vector<std::size_t>;

/// Unnormalized partial variances grouped by the exact support of lambda;
/// the empty support (the mean) is omitted.
inline std::map<VariableSubset, std::vector<double>> partial_variances(const PceExpansion& pce) {
  std::map<VariableSubset, std::vector<double>> out;
  for (const auto& [lambda, eta] : pce.coefficients) {
    VariableSubset support;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (lambda[i] > 0) support.push_back(i);
    if (support.empty()) continue;
    auto& dst = out.try_emplace(support, pce.n_qoi, 0.0).first->second;
    for (std::size_t q = 0; q < pce.n_qoi; ++q) dst[q] += eta[q] * eta[q];
  }
  return out;
}

/// Sobol index of each requested subset u: sum of eta^2 over lambda whose support
/// is exactly u, divided by the total variance. Result [subset][qoi].
inline std::vector<std::vector<double>> sobol_indices(const PceExpansion& pce,
                                                      const std::vector<VariableSubset>& subsets) {
  const Moments mom = pce_mean_var(pce);
  for (bool z : zero_variance(pce))
    if (z) throw UndefinedIndicesError("Sobol indices undefined for a QoI with zero variance");
  const auto parts = partial_variances(pce);
  std::vector<std::vector<double>> out;
  out.reserve(subsets.size());
  for (VariableSubset u : subsets) {
    std::sort(u.begin(), u.end());
    std::vector<double> s(pce.n_qoi, 0.0);
    if (auto it = parts.find(u); it != parts.end())
      for (std::size_t q = 0; q < pce.n_qoi; ++q) s[q] = it->second[q] / mom.variance[q];
    out.push_back(std::move(s));
  }
  return out;
}

/// Every singleton and pair, plus any other subset whose partial variance
/// exceeds `rel_threshold` times the total variance for some QoI.
inline std::vector<VariableSubset> default_sobol_subsets(const PceExpansion& pce,
                                                         double rel_threshold = 1e-6) {
  std::set<VariableSubset> chosen;
  for (std::size_t i = 0; i < pce.dim; ++i) {
    chosen.insert({i});
    for (std::size_t j = i + 1; j < pce.dim; ++j) chosen.insert({i, j});
  }
  const Moments mom = pce_mean_var(pce);
  for (const auto& [u, var] : partial_variances(pce)) {
    for (std::size_t q = 0; q < pce.n_qoi; ++q)
      if (var[q] > rel_threshold * mom.variance[q]) chosen.insert(u);
  }
  std::vector<VariableSubset> out(chosen.begin(), chosen.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const VariableSubset& a, const VariableSubset& b) { return a.size() < b.size(); });
  return out;
}

}  // namespace amisc
