#pragma once

/// \file
/// Tensor-product Clenshaw-Curtis grids and the Lagrange interpolants built on them.
///
/// Point order: lexicographic in the per-dimension node indices with
/// dimension 0 varying slowest, i.e. point k has node index j_i in dimension i
/// where k = ((j_0 * m_1 + j_1) * m_2 + j_2) ... Values are stored row-major as
/// (point, qoi).

#include <cstddef>
#include <span>
#include <vector>

#include "amisc/errors.hpp"
#include "amisc/multi_index.hpp"
#include "amisc/rules.hpp"

namespace amisc {

/// Row-major list of points in R^dim.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> operator[](std::size_t k) const {
    return std::span<const double>(coords).subspan(k * dim, dim);
  }
  void push_back(std::span<const double> p) { coords.insert(coords.end(), p.begin(), p.end()); }
};

inline std::size_t tensor_size(const MultiIndex& beta) {
  std::size_t m = 1;
  for (int b : beta) m *= cc_growth(b);
  return m;
}

/// Calls fn(node_indices) for every grid point of `beta` in the documented order.
template <typename Fn>
void for_each_tensor_node(const MultiIndex& beta, Fn&& fn) {
  const std::size_t d = beta.size();
  std::vector<std::size_t> m(d), j(d, 0);
  for (std::size_t i = 0; i < d; ++i) m[i] = cc_growth(beta[i]);
  const std::size_t total = tensor_size(beta);
  for (std::size_t k = 0; k < total; ++k) {
    fn(static_cast<const std::vector<std::size_t>&>(j));
    for (std::size_t i = d; i-- > 0;) {
      if (++j[i] < m[i]) break;
      j[i] = 0;
    }
  }
}

inline PointSet tensor_points(const MultiIndex& beta) {
  PointSet out{beta.size(), {}};
  out.coords.reserve(tensor_size(beta) * beta.size());
  for_each_tensor_node(beta, [&](const std::vector<std::size_t>& j) {
    for (std::size_t i = 0; i < beta.size(); ++i) out.coords.push_back(cc_rule(beta[i]).nodes[j[i]]);
  });
  return out;
}

/// Contracts a tensor of shape [m_0]...[m_{d-1}][nq] against one vector per
/// dimension, returning the nq-vector sum_j values(j,:) * prod_i factors_i[j_i].
inline std::vector<double> contract_tensor(std::span<const double> values, std::size_t nq,
                                           const std::vector<std::vector<double>>& factors) {
  std::vector<double> in(values.begin(), values.end()), out;
  std::size_t prefix = values.size() / nq;
  for (std::size_t k = factors.size(); k-- > 0;) {
    const auto& f = factors[k];
    const std::size_t mk = f.size();
    prefix /= mk;
    out.assign(prefix * nq, 0.0);
    for (std::size_t p = 0; p < prefix; ++p) {
      double* o = out.data() + p * nq;
      const double* src = in.data() + p * mk * nq;
      for (std::size_t j = 0; j < mk; ++j) {
        const double fj = f[j];
        if (fj == 0.0) continue;
        for (std::size_t q = 0; q < nq; ++q) o[q] += fj * src[j * nq + q];
      }
    }
    in.swap(out);
  }
  return in;
}

/// One tensor-product interpolant f_{alpha,beta}: Clenshaw-Curtis rules per
/// stochastic dimension plus the model values on the full grid.
class TensorComponent {
 public:
  TensorComponent() = default;
  TensorComponent(MultiIndex alpha, MultiIndex beta, std::size_t n_qoi)
      : alpha_(std::move(alpha)), beta_(std::move(beta)), n_qoi_(n_qoi) {
    if (beta_.empty()) throw ValidationError("stochastic index must have at least one dimension");
    if (n_qoi_ == 0) throw ValidationError("at least one QoI is required");
    rules_.reserve(beta_.size());
    for (int b : beta_) rules_.push_back(&cc_rule(b));
  }

  const MultiIndex& alpha() const noexcept { return alpha_; }
  const MultiIndex& beta() const noexcept { return beta_; }
  std::size_t dim() const noexcept { return beta_.size(); }
  std::size_t n_qoi() const noexcept { return n_qoi_; }
  std::size_t size() const { return tensor_size(beta_); }
  const UnivariateRule& rule(std::size_t i) const { return *rules_[i]; }
  bool populated() const noexcept { return populated_; }

  PointSet points() const { return tensor_points(beta_); }

  /// Values in grid-point order, row-major (point, qoi).
  void set_values(std::vector<double> values) {
    if (values.size() != size() * n_qoi_) throw ValidationError("value array does not match grid size");
    values_ = std::move(values);
    populated_ = true;
  }
  std::span<const double> values() const {
    require();
    return values_;
  }

  std::vector<double> evaluate(std::span<const double> z) const {
    require();
    if (z.size() != dim()) throw ValidationError("evaluation point has wrong dimension");
    std::vector<std::vector<double>> basis(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      basis[i].resize(rules_[i]->size());
      rules_[i]->basis_values(z[i], basis[i]);
    }
    return contract_tensor(values_, n_qoi_, basis);
  }

  std::vector<double> mean() const {
    require();
    std::vector<std::vector<double>> weights(dim());
    for (std::size_t i = 0; i < dim(); ++i) weights[i] = rules_[i]->quad_weights;
    return contract_tensor(values_, n_qoi_, weights);
  }

 private:
  void require() const {
    if (!populated_) throw NotReadyError("tensor component has no model values");
  }

  MultiIndex alpha_, beta_;
  std::size_t n_qoi_ = 1;
  std::vector<const UnivariateRule*> rules_;
  std::vector<double> values_;
  bool populated_ = false;
};

/// Convenience: component whose values come from sampling `f` on the grid.
template <typename Fn>
TensorComponent sample_component(const MultiIndex& alpha, const MultiIndex& beta, std::size_t n_qoi,
                                 Fn&& f) {
  TensorComponent comp(alpha, beta, n_qoi);
  const PointSet pts = comp.points();
  std::vector<double> values;
  values.reserve(pts.size() * n_qoi);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::vector<double> v = f(pts[k]);
    values.insert(values.end(), v.begin(), v.end());
  }
  comp.set_values(std::move(values));
  return comp;
}

}  // namespace amisc
