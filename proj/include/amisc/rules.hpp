#pragma once

/// \file
/// Nested Clenshaw-Curtis rules on [-1,1]: nodes, probability-weighted
/// quadrature weights and barycentric Lagrange evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "amisc/errors.hpp"

namespace amisc {

/// Deepest level supported by the nested-node key arithmetic.
inline constexpr int kMaxRuleLevel = 30;

/// Number of nodes of the level-`level` rule: 1, 3, 5, 9, 17, ...
constexpr std::size_t cc_growth(int level) {
  if (level < 0) throw ValidationError("rule level must be non-negative");
  return level == 0 ? 1 : (std::size_t{1} << level) + 1;
}

/// Nodes cos(j*pi/(m-1)), j = 0..m-1, ordered from +1 to -1. Level 0 is the
/// midpoint. Evaluated as sin(pi*(n-2j)/(2n)) so the rule is exactly
/// symmetric, the middle node is exactly 0, and a node shared by two levels has
/// a bitwise identical value at both.
inline std::vector<double> cc_nodes(int level) {
  const std::size_t m = cc_growth(level);
  if (m == 1) return {0.0};
  const double n = static_cast<double>(m - 1);
  std::vector<double> x(m);
  for (std::size_t j = 0; j < m; ++j) {
    x[j] = std::sin(std::numbers::pi * (n - 2.0 * static_cast<double>(j)) / (2.0 * n));
  }
  return x;
}

/// Quadrature weights against the uniform probability density on [-1,1]
/// (the integral of each Lagrange basis polynomial times 1/2).
inline std::vector<double> cc_quadrature_weights(int level) {
  const std::size_t m = cc_growth(level);
  if (m == 1) return {1.0};
  const std::size_t n = m - 1;
  const double nd = static_cast<double>(n);
  std::vector<double> w(m);
  for (std::size_t j = 0; j <= n; ++j) {
    double s = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const double b = (2 * k == n) ? 1.0 : 2.0;
      // cos(2*k*j*pi/n) with the argument reduced modulo 2*pi in integer arithmetic.
      const std::size_t r = (2 * k * j) % (2 * n);
      s += b / (4.0 * static_cast<double>(k * k) - 1.0) *
           std::cos(std::numbers::pi * static_cast<double>(r) / nd);
    }
    const double c = (j == 0 || j == n) ? 1.0 : 2.0;
    w[j] = 0.5 * c / nd * (1.0 - s);
  }
  return w;
}

/// Barycentric weights of the Clenshaw-Curtis extrema: (-1)^j, halved at the ends.
inline std::vector<double> cc_barycentric_weights(int level) {
  const std::size_t m = cc_growth(level);
  if (m == 1) return {1.0};
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j + 1 == m) ? 0.5 : 1.0);
  }
  return w;
}

/// Barycentric weights for arbitrary distinct nodes. Differences are scaled by
/// 4/(max-min) so that the products neither overflow nor underflow for
/// ~10^3 nodes; the barycentric formula is invariant under a common scale.
inline std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t m = nodes.size();
  if (m == 0) throw InvalidRuleError("rule has no nodes");
  if (m == 1) return {1.0};
  double lo = nodes[0], hi = nodes[0];
  for (double x : nodes) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) throw InvalidRuleError("duplicate nodes in rule");
  const double scale = 4.0 / (hi - lo);
  std::vector<double> w(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double d = nodes[j] - nodes[k];
      if (d == 0.0) throw InvalidRuleError("duplicate nodes in rule");
      w[j] *= scale * d;
    }
    w[j] = 1.0 / w[j];
  }
  return w;
}

/// All Lagrange basis values l_0(x), ..., l_{m-1}(x) via the barycentric formula.
inline void lagrange_basis_values(std::span<const double> nodes, std::span<const double> bary,
                                  double x, std::span<double> out) {
  const std::size_t m = nodes.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (x == nodes[k]) {
      std::fill(out.begin(), out.end(), 0.0);
      out[k] = 1.0;
      return;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    out[k] = bary[k] / (x - nodes[k]);
    sum += out[k];
  }
  for (std::size_t k = 0; k < m; ++k) out[k] /= sum;
}

/// Value of the j-th (zero-based) Lagrange basis polynomial on `nodes` at x.
inline double lagrange_basis_eval(std::span<const double> nodes, std::size_t j, double x) {
  if (j >= nodes.size()) throw ValidationError("Lagrange basis index out of range");
  const auto bary = barycentric_weights(nodes);
  std::vector<double> values(nodes.size());
  lagrange_basis_values(nodes, bary, x, values);
  return values[j];
}

/// Immutable univariate rule. Shared through `cc_rule`.
struct UnivariateRule {
  int level = 0;
  std::vector<double> nodes;
  std::vector<double> quad_weights;
  std::vector<double> bary_weights;

  std::size_t size() const noexcept { return nodes.size(); }

  void basis_values(double x, std::span<double> out) const {
    lagrange_basis_values(nodes, bary_weights, x, out);
  }
};

inline UnivariateRule make_cc_rule(int level) {
  return UnivariateRule{level, cc_nodes(level), cc_quadrature_weights(level),
                        cc_barycentric_weights(level)};
}

/// Process-wide cache of Clenshaw-Curtis rules. Thread-safe; references stay valid.
inline const UnivariateRule& cc_rule(int level) {
  if (level < 0 || level > kMaxRuleLevel) throw ValidationError("rule level out of range");
  static std::array<std::unique_ptr<UnivariateRule>, kMaxRuleLevel + 1> cache;
  static std::array<std::once_flag, kMaxRuleLevel + 1> flags;
  std::call_once(flags[static_cast<std::size_t>(level)], [level] {
    cache[static_cast<std::size_t>(level)] = std::make_unique<UnivariateRule>(make_cc_rule(level));
  });
  return *cache[static_cast<std::size_t>(level)];
}

/// Level-independent identity of node j of the level-`level` rule: its
/// position on the dyadic grid of level kMaxRuleLevel. Two nodes of the nested
/// family coincide iff their keys are equal.
constexpr std::uint64_t cc_node_key(int level, std::size_t j) {
  if (level == 0) return std::uint64_t{1} << (kMaxRuleLevel - 1);
  return static_cast<std::uint64_t>(j) << (kMaxRuleLevel - level);
}

/// True if node j of `level` is absent from every coarser level.
constexpr bool cc_node_is_new(int level, std::size_t j) {
  if (level == 0) return true;
  if (level == 1) return j != 1;
  return j % 2 == 1;
}

/// Number of nodes of `level` absent from level-1.
constexpr std::size_t cc_new_node_count(int level) {
  if (level == 0) return 1;
  if (level == 1) return 2;
  return std::size_t{1} << (level - 1);
}

}  // namespace amisc
