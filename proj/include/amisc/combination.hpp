#pragma once

/// \file
/// Downward-closed index sets, combination-technique coefficients and the
/// bookkeeping of nested sparse-grid points.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"
#include "amisc/rules.hpp"
#include "amisc/tensor_grid.hpp"

namespace amisc {

/// Combination coefficient per index. Zero coefficients may be present.
using CombinationWeights = std::map<MultiIndex, int>;

inline bool is_downward_closed(const IndexSet& set) {
  for (const auto& u : set) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (u[k] > 0 && !set.contains(u.shifted(k, -1))) return false;
    }
  }
  return true;
}

namespace detail {

// Sum of (-1)^{|j|} over binary offsets j with beta + j in the set. Offsets are
// grown one dimension at a time; a missing index prunes every larger offset
// because the set is downward closed.
inline int coefficient_sum(const IndexSet& set, MultiIndex& probe, std::size_t k, int sign) {
  if (k == probe.size()) return sign;
  int total = coefficient_sum(set, probe, k + 1, sign);
  probe[k] += 1;
  if (set.contains(probe)) total += coefficient_sum(set, probe, k + 1, -sign);
  probe[k] -= 1;
  return total;
}

}  // namespace detail

/// c_beta = sum_{j in {0,1}^d} (-1)^{|j|_1} chi(beta + j) for every beta in the set.
inline CombinationWeights combination_coefficients(const IndexSet& set) {
  if (!is_downward_closed(set)) throw ValidationError("index set is not downward closed");
  CombinationWeights out;
  for (const auto& beta : set) {
    MultiIndex probe = beta;
    out.emplace_hint(out.end(), beta, detail::coefficient_sum(set, probe, 0, 1));
  }
  return out;
}

/// Total-degree set {beta in N_0^d : |beta|_1 <= level}.
inline IndexSet isotropic_index_set(int level, std::size_t dim) {
  if (level < 0) throw ValidationError("level must be non-negative");
  if (dim == 0) throw ValidationError("dimension must be positive");
  IndexSet out;
  MultiIndex cur(dim);
  auto rec = [&](auto& self, std::size_t k, int budget) -> void {
    if (k == dim) {
      out.insert(cur);
      return;
    }
    for (int v = 0; v <= budget; ++v) {
      cur[k] = v;
      self(self, k + 1, budget - v);
    }
    cur[k] = 0;
  };
  rec(rec, 0, level);
  return out;
}

/// Closed-form Smolyak coefficient (-1)^{l-|beta|} C(d-1, l-|beta|) of an index
/// with |beta|_1 = norm in the total-degree set of the given level; 0 outside the band.
inline long long isotropic_coefficient(int level, std::size_t dim, int norm) {
  const int r = level - norm;
  const long long n = static_cast<long long>(dim) - 1;
  if (r < 0 || r > n) return 0;
  long long binom = 1;
  for (long long i = 1; i <= r; ++i) binom = binom * (n - r + i) / i;
  return (r % 2 == 0) ? binom : -binom;
}

/// Union of the tensor grids of a downward-closed set, with the partition of
/// the union into the sets of points first introduced by each index.
struct SparseGrid {
  PointSet points;
  /// Per point: nested node key in every dimension.
  std::vector<std::vector<std::uint64_t>> keys;
  /// beta -> positions in `points` of the points new at beta.
  std::map<MultiIndex, std::vector<std::size_t>> new_points;

  std::size_t size() const noexcept { return points.size(); }
};

/// For nested rules the points of grid beta missing from every grid beta* < beta
/// are exactly the products of per-dimension nodes that are new at level beta_i.
template <typename Fn>
void for_each_new_node(const MultiIndex& beta, Fn&& fn) {
  for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
    for (std::size_t i = 0; i < beta.size(); ++i)
      if (!cc_node_is_new(beta[i], j[i])) return;
    fn(j);
  });
}

inline SparseGrid sparse_points(const IndexSet& set) {
  if (!is_downward_closed(set)) throw ValidationError("index set is not downward closed");
  SparseGrid grid;
  if (set.empty()) return grid;
  const std::size_t d = set.begin()->size();
  grid.points.dim = d;
  std::vector<double> p(d);
  std::vector<std::uint64_t> key(d);
  for (const auto& beta : set) {
    auto& mine = grid.new_points[beta];
    for_each_new_node(beta, [&](const std::vector<std::size_t>& j) {
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = cc_rule(beta[i]).nodes[j[i]];
        key[i] = cc_node_key(beta[i], j[i]);
      }
      mine.push_back(grid.points.size());
      grid.points.push_back(p);
      grid.keys.push_back(key);
    });
  }
  return grid;
}

/// sum_beta c_beta * f_beta(z). `components` maps index -> TensorComponent.
template <typename ComponentMap>
std::vector<double> sparse_eval(const CombinationWeights& weights, const ComponentMap& components,
                                std::span<const double> z) {
  std::vector<double> out;
  for (const auto& [idx, c] : weights) {
    if (c == 0) continue;
    auto it = components.find(idx);
    if (it == components.end()) throw NotReadyError("missing tensor component for a nonzero coefficient");
    const std::vector<double> v = it->second.evaluate(z);
    if (out.empty()) out.assign(v.size(), 0.0);
    for (std::size_t q = 0; q < v.size(); ++q) out[q] += c * v[q];
  }
  return out;
}

template <typename ComponentMap>
std::vector<double> sparse_mean(const CombinationWeights& weights, const ComponentMap& components) {
  std::vector<double> out;
  for (const auto& [idx, c] : weights) {
    if (c == 0) continue;
    auto it = components.find(idx);
    if (it == components.end()) throw NotReadyError("missing tensor component for a nonzero coefficient");
    const std::vector<double> v = it->second.mean();
    if (out.empty()) out.assign(v.size(), 0.0);
    for (std::size_t q = 0; q < v.size(); ++q) out[q] += c * v[q];
  }
  return out;
}

/// Text form: one index per line, entries space separated, then a tab and the
/// coefficient when weights are given.
inline void write_index_set(std::ostream& os, const IndexSet& set,
                            const CombinationWeights* weights = nullptr) {
  for (const auto& idx : set) {
    os << idx.to_string(' ');
    if (weights) {
      auto it = weights->find(idx);
      os << '\t' << (it == weights->end() ? 0 : it->second);
    }
    os << '\n';
  }
}

struct IndexSetText {
  IndexSet set;
  std::optional<CombinationWeights> weights;
};

inline IndexSetText read_index_set(std::istream& is) {
  IndexSetText out;
  std::string line;
  std::optional<std::size_t> dim;
  bool any_weight = false, any_plain = false;
  CombinationWeights weights;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::istringstream entries(line.substr(0, tab));
    std::vector<int> v;
    int e;
    while (entries >> e) v.push_back(e);
    if (!entries.eof()) throw ValidationError("malformed index line: " + line);
    if (dim && *dim != v.size()) throw ValidationError("indices of unequal length");
    dim = v.size();
    MultiIndex idx(std::move(v));
    if (tab != std::string::npos) {
      std::istringstream cs(line.substr(tab + 1));
      int c;
      if (!(cs >> c)) throw ValidationError("malformed coefficient: " + line);
      weights[idx] = c;
      any_weight = true;
    } else {
      any_plain = true;
    }
    out.set.insert(std::move(idx));
  }
  if (any_weight && any_plain) throw ValidationError("coefficients present on some lines only");
  if (any_weight) out.weights = std::move(weights);
  return out;
}

}  // namespace amisc
