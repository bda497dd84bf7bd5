#pragma once

/// \file
/// Multi-index stochastic collocation surrogates over the combined index
/// space [alpha, beta]: incremental combination coefficients, an incrementally
/// maintained PCE (for exact mean and variance), refinement indicators and
/// admissibility.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amisc/combination.hpp"
#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"
#include "amisc/pce.hpp"
#include "amisc/tensor_grid.hpp"

namespace amisc {

/// Combined index [alpha, beta] stored as one multi-index of length n_alpha + n_beta.
using CombinedIndex = MultiIndex;

inline MultiIndex alpha_part(const CombinedIndex& idx, std::size_t n_alpha) { return idx.slice(0, n_alpha); }
inline MultiIndex beta_part(const CombinedIndex& idx, std::size_t n_alpha) {
  return idx.slice(n_alpha, idx.size() - n_alpha);
}

/// Indicator data of one candidate index.
struct RefinementRecord {
  CombinedIndex index;
  std::vector<double> delta_e_mean;
  std::vector<double> delta_e_var;
  double delta_w = 0.0;
  double gamma = 0.0;
  /// max over QoI of kappa dE_mu + (1 - kappa) dE_var, i.e. gamma * delta_w.
  double delta_e = 0.0;
};

/// gamma = max_q (kappa dE_mu_q + (1 - kappa) dE_var_q) / dW.
inline double indicator_gamma(const RefinementRecord& rec, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw ValidationError("kappa must lie in [0, 1]");
  if (!(rec.delta_w > 0.0)) throw ValidationError("work increment must be positive");
  double best = 0.0;
  for (std::size_t q = 0; q < rec.delta_e_mean.size(); ++q)
    best = std::max(best, (kappa * rec.delta_e_mean[q] + (1.0 - kappa) * rec.delta_e_var[q]) / rec.delta_w);
  return best;
}

/// True if every backward neighbor of idx lies in `accepted`.
inline bool is_admissible(const IndexSet& accepted, const CombinedIndex& idx) {
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (idx[k] > 0 && !accepted.contains(idx.shifted(k, -1))) return false;
  return true;
}

/// Forward neighbors idx + e_k within `bounds` (inclusive, per combined
/// dimension) whose backward neighbors are all accepted.
inline std::vector<CombinedIndex> refine_neighbors(const IndexSet& accepted, const CombinedIndex& idx,
                                                   const MultiIndex& bounds) {
  if (!accepted.contains(idx)) throw ValidationError("refined index must be accepted");
  std::vector<CombinedIndex> out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] + 1 > bounds[k]) continue;
    CombinedIndex cand = idx.shifted(k, 1);
    if (!accepted.contains(cand) && is_admissible(accepted, cand)) out.push_back(std::move(cand));
  }
  return out;
}

/// Coefficient changes caused by inserting `idx` into the downward-closed
/// set `accepted`: +1 for idx and (-1)^{|D|_1} for every idx - D, D in {0,1}^n
/// nonzero. Every such index is already accepted when idx is admissible.
inline std::vector<std::pair<CombinedIndex, int>> coefficient_changes(const IndexSet& accepted,
                                                                      const CombinedIndex& idx) {
  if (accepted.contains(idx)) throw ValidationError("index is already accepted");
  if (!is_admissible(accepted, idx)) throw ValidationError("index is not admissible");
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (idx[k] > 0) dims.push_back(k);
  std::vector<std::pair<CombinedIndex, int>> out;
  out.reserve(std::size_t{1} << dims.size());
  for (std::size_t mask = 0; mask < (std::size_t{1} << dims.size()); ++mask) {
    CombinedIndex lower = idx;
    int bits = 0;
    for (std::size_t b = 0; b < dims.size(); ++b)
      if (mask & (std::size_t{1} << b)) {
        lower[dims[b]] -= 1;
        ++bits;
      }
    out.emplace_back(std::move(lower), bits % 2 == 0 ? 1 : -1);
  }
  return out;
}

/// Incremental coefficient update for inserting new_idx into `accepted`.
/// Equals combination_coefficients(accepted + {new_idx}).
inline CombinationWeights update_coefficients(CombinationWeights coefficients, const IndexSet& accepted,
                                              const CombinedIndex& new_idx) {
  for (const auto& [idx, delta] : coefficient_changes(accepted, new_idx)) coefficients[idx] += delta;
  return coefficients;
}

/// Change to the surrogate caused by inserting one index.
struct InsertionDelta {
  CombinedIndex index;
  std::vector<std::pair<CombinedIndex, int>> coefficient_changes;
  /// PCE increment, dense over Lambda_{beta(index)} in grid layout.
  std::vector<double> pce;
  std::vector<double> d_mean;
  std::vector<double> d_var;
};

/// A MISC surrogate sum_{[a,b] in J} c_{a,b} f_{a,b}. Holds the accepted set,
/// the candidates (active set) with their evaluated components, and a PCE of
/// the current surrogate that is updated with every insertion.
class MiscSurrogate {
 public:
  MiscSurrogate() = default;
  MiscSurrogate(std::size_t n_alpha, std::size_t n_beta, std::size_t n_qoi)
      : n_alpha_(n_alpha), n_beta_(n_beta), n_qoi_(n_qoi), mean_(n_qoi, 0.0), var_(n_qoi, 0.0),
        scale_(n_qoi, 1.0) {}

  std::size_t n_alpha() const noexcept { return n_alpha_; }
  std::size_t n_beta() const noexcept { return n_beta_; }
  std::size_t n_qoi() const noexcept { return n_qoi_; }
  const IndexSet& accepted() const noexcept { return accepted_; }
  const IndexSet& active() const noexcept { return active_; }
  const CombinationWeights& coefficients() const noexcept { return coefficients_; }
  const std::map<CombinedIndex, TensorComponent>& components() const noexcept { return components_; }
  double work_total() const noexcept { return work_total_; }
  bool empty() const noexcept { return accepted_.empty(); }

  /// Running mean and variance of the surrogate (exact, via the PCE).
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& variance() const noexcept { return var_; }

  /// Per-QoI normalization |f_{0,0}| used by the error indicators.
  const std::vector<double>& indicator_scale() const noexcept { return scale_; }
  /// Sets the normalization from the coarsest model's center value; magnitudes
  /// below 1e-12 fall back to 1.
  void set_indicator_scale(std::span<const double> center_values) {
    for (std::size_t q = 0; q < n_qoi_; ++q)
      scale_[q] = std::abs(center_values[q]) < 1e-12 ? 1.0 : std::abs(center_values[q]);
  }

  void add_work(double w) { work_total_ += w; }

  /// Registers an evaluated candidate component (active set).
  void add_candidate(const CombinedIndex& idx, TensorComponent comp) {
    if (accepted_.contains(idx) || active_.contains(idx)) throw ValidationError("index already present");
    check_dims(idx);
    pce_cache_.emplace(idx, component_pce_dense(comp));
    components_.insert_or_assign(idx, std::move(comp));
    active_.insert(idx);
  }

  const TensorComponent& component(const CombinedIndex& idx) const {
    auto it = components_.find(idx);
    if (it == components_.end()) throw NotReadyError("no component for index");
    return it->second;
  }

  /// Effect of inserting idx (its component must be registered) into the
  /// current accepted set, without modifying the surrogate.
  InsertionDelta preview(const CombinedIndex& idx) const {
    InsertionDelta d;
    d.index = idx;
    d.coefficient_changes = coefficient_changes(accepted_, idx);
    const MultiIndex beta_new = beta_part(idx, n_alpha_);
    const std::size_t m_new = tensor_size(beta_new);
    d.pce.assign(m_new * n_qoi_, 0.0);
    d.d_mean.assign(n_qoi_, 0.0);

    // Strides of the Lambda_{beta_new} layout (dimension 0 slowest).
    std::vector<std::size_t> stride(n_beta_, 1);
    for (std::size_t i = n_beta_; i-- > 1;) stride[i - 1] = stride[i] * cc_growth(beta_new[i]);

    for (const auto& [lower, delta] : d.coefficient_changes) {
      const MultiIndex beta = beta_part(lower, n_alpha_);
      const auto& eta = pce_cache_.at(lower);
      std::size_t k = 0;
      for_each_tensor_node(beta, [&](const std::vector<std::size_t>& lam) {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n_beta_; ++i) pos += lam[i] * stride[i];
        for (std::size_t q = 0; q < n_qoi_; ++q) d.pce[pos * n_qoi_ + q] += delta * eta[k * n_qoi_ + q];
        ++k;
      });
    }
    // Mean is the lambda = 0 coefficient; variance change is
    // sum_{lambda != 0} (eta + d)^2 - eta^2 = d (2 eta + d).
    for (std::size_t q = 0; q < n_qoi_; ++q) d.d_mean[q] = d.pce[q];
    d.d_var.assign(n_qoi_, 0.0);
    std::size_t k = 0;
    for_each_tensor_node(beta_new, [&](const std::vector<std::size_t>& lam) {
      if (k > 0) {
        const double* cur = lookup(lam);
        for (std::size_t q = 0; q < n_qoi_; ++q) {
          const double dk = d.pce[k * n_qoi_ + q];
          const double ek = cur ? cur[q] : 0.0;
          d.d_var[q] += dk * (2.0 * ek + dk);
        }
      }
      ++k;
    });
    return d;
  }

  /// Moves idx from the active to the accepted set, applying `delta` (which
  /// must come from preview(idx) against the current state).
  void commit(const InsertionDelta& delta) {
    const CombinedIndex& idx = delta.index;
    if (!active_.contains(idx)) throw ValidationError("only active indices can be accepted");
    for (const auto& [lower, dc] : delta.coefficient_changes) coefficients_[lower] += dc;
    const MultiIndex beta_new = beta_part(idx, n_alpha_);
    std::size_t k = 0;
    for_each_tensor_node(beta_new, [&](const std::vector<std::size_t>& lam) {
      double* dst = slot(lam);
      for (std::size_t q = 0; q < n_qoi_; ++q) dst[q] += delta.pce[k * n_qoi_ + q];
      ++k;
    });
    for (std::size_t q = 0; q < n_qoi_; ++q) {
      mean_[q] += delta.d_mean[q];
      var_[q] += delta.d_var[q];
    }
    active_.erase(idx);
    accepted_.insert(idx);
  }

  /// Indicators of inserting idx: |d mean| / |f00| and |d var| / |f00|^2 per QoI.
  std::pair<std::vector<double>, std::vector<double>> error_indicators(const InsertionDelta& d) const {
    std::vector<double> em(n_qoi_), ev(n_qoi_);
    for (std::size_t q = 0; q < n_qoi_; ++q) {
      em[q] = std::abs(d.d_mean[q]) / scale_[q];
      ev[q] = std::abs(d.d_var[q]) / (scale_[q] * scale_[q]);
    }
    return {em, ev};
  }

  std::vector<double> evaluate(std::span<const double> z) const {
    if (accepted_.empty()) throw NotReadyError("surrogate is empty");
    return sparse_eval(coefficients_, components_, z);
  }

  /// Mean recomputed from the tensor quadratures (independent of the PCE).
  std::vector<double> quadrature_mean() const {
    if (accepted_.empty()) throw NotReadyError("surrogate is empty");
    return sparse_mean(coefficients_, components_);
  }

  /// The incrementally maintained expansion.
  PceExpansion pce() const {
    PceExpansion out{n_beta_, n_qoi_, {}};
    for (const auto& [lam, off] : pce_index_) {
      std::vector<double> eta(pce_values_.begin() + static_cast<std::ptrdiff_t>(off),
                              pce_values_.begin() + static_cast<std::ptrdiff_t>(off + n_qoi_));
      out.coefficients.emplace(lam, std::move(eta));
    }
    return out;
  }

  /// Unique stochastic points evaluated for each alpha among accepted indices.
  std::map<MultiIndex, std::size_t> sample_counts() const {
    std::map<MultiIndex, std::set<std::vector<std::uint64_t>>> seen;
    for (const auto& idx : accepted_) {
      auto& s = seen[alpha_part(idx, n_alpha_)];
      const MultiIndex beta = beta_part(idx, n_alpha_);
      for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
        std::vector<std::uint64_t> key(n_beta_);
        for (std::size_t i = 0; i < n_beta_; ++i) key[i] = cc_node_key(beta[i], j[i]);
        s.insert(std::move(key));
      });
    }
    std::map<MultiIndex, std::size_t> out;
    for (const auto& [a, s] : seen) out.emplace(a, s.size());
    return out;
  }

 private:
  void check_dims(const CombinedIndex& idx) const {
    if (idx.size() != n_alpha_ + n_beta_) throw ValidationError("combined index has wrong length");
  }

  const double* lookup(const std::vector<std::size_t>& lam) const {
    std::vector<int> v(lam.begin(), lam.end());
    auto it = pce_index_.find(MultiIndex(std::move(v)));
    return it == pce_index_.end() ? nullptr : pce_values_.data() + it->second;
  }

  double* slot(const std::vector<std::size_t>& lam) {
    std::vector<int> v(lam.begin(), lam.end());
    auto [it, inserted] = pce_index_.try_emplace(MultiIndex(std::move(v)), pce_values_.size());
    if (inserted) pce_values_.resize(pce_values_.size() + n_qoi_, 0.0);
    return pce_values_.data() + it->second;
  }

  std::size_t n_alpha_ = 0, n_beta_ = 1, n_qoi_ = 1;
  IndexSet accepted_, active_;
  CombinationWeights coefficients_;
  std::map<CombinedIndex, TensorComponent> components_;
  std::map<CombinedIndex, std::vector<double>> pce_cache_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> pce_index_;
  std::vector<double> pce_values_;
  std::vector<double> mean_, var_, scale_;
  double work_total_ = 0.0;
};

/// Indicators (dE_mu, dE_var) of adding idx with its trial component to the surrogate.
inline std::pair<std::vector<double>, std::vector<double>> delta_error_indicators(
    const MiscSurrogate& surrogate, const CombinedIndex& idx, const TensorComponent& trial) {
  MiscSurrogate probe = surrogate;
  if (!probe.active().contains(idx)) probe.add_candidate(idx, trial);
  return probe.error_indicators(probe.preview(idx));
}

struct AllocationEntry {
  std::size_t samples = 0;
  double work_fraction = 0.0;
};

/// Per-alpha unique sample counts of the accepted set and their share of the
/// total work sum_alpha W_alpha M_alpha.
template <typename CostFn>
std::map<MultiIndex, AllocationEntry> allocation_profile(const MiscSurrogate& surrogate, CostFn&& cost) {
  if (surrogate.empty()) throw ValidationError("surrogate is empty");
  std::map<MultiIndex, AllocationEntry> out;
  double total = 0.0;
  for (const auto& [alpha, count] : surrogate.sample_counts()) {
    const double w = cost(alpha) * static_cast<double>(count);
    out[alpha] = {count, w};
    total += w;
  }
  for (auto& [alpha, e] : out) e.work_fraction /= total;
  return out;
}

}  // namespace amisc
