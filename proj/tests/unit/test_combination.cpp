#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "amisc/combination.hpp"

using namespace amisc;

namespace {

// Grows a random downward-closed set by repeatedly adding admissible indices.
IndexSet random_downward_closed(std::mt19937_64& rng, std::size_t d, std::size_t size, int max_level = 4,
                                IndexSet set = {}) {
  if (set.empty()) set.insert(MultiIndex(d));
  while (set.size() < size) {
    std::vector<MultiIndex> candidates;
    for (const auto& u : set)
      for (std::size_t k = 0; k < d; ++k) {
        const MultiIndex v = u.shifted(k);
        if (v[k] > max_level || set.contains(v)) continue;
        bool ok = true;
        for (std::size_t i = 0; i < d; ++i)
          if (v[i] > 0 && !set.contains(v.shifted(i, -1))) ok = false;
        if (ok) candidates.push_back(v);
      }
    if (candidates.empty()) break;
    set.insert(candidates[rng() % candidates.size()]);
  }
  return set;
}

// chi-formula by looping over all 2^d offsets.
int brute_coefficient(const IndexSet& set, const MultiIndex& beta) {
  const std::size_t d = beta.size();
  int c = 0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    MultiIndex v = beta;
    int sign = 1;
    for (std::size_t i = 0; i < d; ++i)
      if (mask & (1u << i)) {
        v[i] += 1;
        sign = -sign;
      }
    if (set.contains(v)) c += sign;
  }
  return c;
}

std::size_t brute_union_count(const IndexSet& set) {
  std::set<std::vector<double>> seen;
  for (const auto& beta : set) {
    const auto pts = tensor_points(beta);
    for (std::size_t k = 0; k < pts.size(); ++k) seen.emplace(pts[k].begin(), pts[k].end());
  }
  return seen.size();
}

std::vector<double> f_cos(std::span<const double> z) {
  double v = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) v *= std::cos((i == 0 ? 2.0 : 1.0) * M_PI * z[i]);
  return {v + 0.3 * z[0]};
}

std::map<MultiIndex, TensorComponent> components_for(const IndexSet& set) {
  std::map<MultiIndex, TensorComponent> out;
  for (const auto& beta : set) out.emplace(beta, sample_component(MultiIndex{}, beta, 1, f_cos));
  return out;
}

}  // namespace

TEST(DownwardClosed, Examples) {
  EXPECT_TRUE(is_downward_closed(IndexSet{MultiIndex{0}}));
  EXPECT_TRUE(is_downward_closed(IndexSet{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}}));
  EXPECT_FALSE(is_downward_closed(IndexSet{MultiIndex{0, 0}, MultiIndex{1, 1}}));
  EXPECT_THROW(combination_coefficients(IndexSet{MultiIndex{0, 0}, MultiIndex{1, 1}}), ValidationError);
}

TEST(Coefficients, LoneIndexAndIsotropicLevelTwo) {
  EXPECT_EQ(combination_coefficients(IndexSet{MultiIndex{0, 0}}).at(MultiIndex{0, 0}), 1);
  const auto c = combination_coefficients(isotropic_index_set(2, 2));
  for (const auto& [beta, v] : c) {
    if (beta.l1() == 2) EXPECT_EQ(v, 1) << beta;
    else if (beta.l1() == 1) EXPECT_EQ(v, -1) << beta;
    else EXPECT_EQ(v, 0) << beta;
  }
}

TEST(Coefficients, RandomSetsTelescopeAndMatchSurplusSum) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng() % 4;
    const IndexSet set = random_downward_closed(rng, d, 1 + rng() % 12, 3);
    const auto c = combination_coefficients(set);
    int total = 0;
    for (const auto& [beta, v] : c) {
      EXPECT_EQ(v, brute_coefficient(set, beta));
      total += v;
    }
    EXPECT_EQ(total, 1);

    if (trial % 10 != 0) continue;
    // Combined interpolant equals the sum of hierarchical surpluses
    // Delta_beta = sum_{j in {0,1}^d, beta-j >= 0} (-1)^{|j|} f_{beta-j}.
    const auto comps = components_for(set);
    std::vector<double> z(d);
    for (auto& x : z) x = u(rng);
    double surplus_sum = 0.0;
    for (const auto& beta : set) {
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        MultiIndex v = beta;
        int sign = 1;
        bool valid = true;
        for (std::size_t i = 0; i < d; ++i)
          if (mask & (1u << i)) {
            if (v[i] == 0) valid = false;
            else v[i] -= 1;
            sign = -sign;
          }
        if (valid) surplus_sum += sign * comps.at(v).evaluate(z)[0];
      }
    }
    EXPECT_NEAR(sparse_eval(c, comps, z)[0], surplus_sum, 1e-12);
  }
}

TEST(Isotropic, SetsAndClosedFormCoefficients) {
  EXPECT_EQ(isotropic_index_set(0, 3), IndexSet{MultiIndex(3)});
  const IndexSet l2 = isotropic_index_set(2, 2);
  const IndexSet expect{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1},
                        MultiIndex{2, 0}, MultiIndex{1, 1}, MultiIndex{0, 2}};
  EXPECT_EQ(l2, expect);
  for (int l = 0; l <= 5; ++l)
    for (std::size_t d = 1; d <= 5; ++d) {
      const IndexSet set = isotropic_index_set(l, d);
      EXPECT_TRUE(is_downward_closed(set));
      for (const auto& [beta, v] : combination_coefficients(set))
        EXPECT_EQ(v, isotropic_coefficient(l, d, beta.l1())) << "l=" << l << " d=" << d << " beta=" << beta;
    }
}

TEST(SparsePoints, CountsAndPartition) {
  EXPECT_EQ(sparse_points(IndexSet{MultiIndex{0, 0, 0}}).size(), 1u);
  for (std::size_t d : {2u, 3u, 5u}) {
    const IndexSet set = isotropic_index_set(2, d);
    const auto grid = sparse_points(set);
    EXPECT_EQ(grid.size(), 2 * d * d + 2 * d + 1);
    EXPECT_EQ(grid.size(), brute_union_count(set));
    std::size_t total = 0;
    for (const auto& [beta, pts] : grid.new_points) total += pts.size();
    EXPECT_EQ(total, grid.size());
  }
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const IndexSet set = random_downward_closed(rng, 1 + rng() % 3, 1 + rng() % 15);
    const auto grid = sparse_points(set);
    EXPECT_EQ(grid.size(), brute_union_count(set));
    std::set<std::vector<std::uint64_t>> keys(grid.keys.begin(), grid.keys.end());
    EXPECT_EQ(keys.size(), grid.size());
    // New points of beta are absent from every grid strictly below it.
    for (const auto& [beta, pos] : grid.new_points)
      for (std::size_t i = 0; i < beta.size(); ++i) {
        if (beta[i] == 0) continue;
        const auto lower = tensor_points(beta.shifted(i, -1));
        std::set<std::vector<double>> lower_set;
        for (std::size_t k = 0; k < lower.size(); ++k) lower_set.emplace(lower[k].begin(), lower[k].end());
        for (std::size_t p : pos) {
          const auto pt = grid.points[p];
          EXPECT_FALSE(lower_set.contains(std::vector<double>(pt.begin(), pt.end())));
        }
      }
  }
}

TEST(SparsePoints, MonotoneGrowth) {
  std::mt19937_64 rng(5);
  IndexSet set{MultiIndex(3)};
  std::size_t prev = 1;
  for (int step = 0; step < 20; ++step) {
    set = random_downward_closed(rng, 3, set.size() + 1, 4, set);
    const auto n = sparse_points(set).size();
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(SparseEval, SingleIndexAndNestedReproduction) {
  const IndexSet closed{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{2, 0}, MultiIndex{0, 1},
                        MultiIndex{1, 1}, MultiIndex{2, 1}};
  const auto comps = components_for(closed);
  const auto c = combination_coefficients(closed);
  const std::vector<double> z{0.3, -0.4};
  EXPECT_NEAR(sparse_eval(c, comps, z)[0], comps.at(MultiIndex{2, 1}).evaluate(z)[0], 1e-14);

  const IndexSet set = isotropic_index_set(2, 2);
  const auto comps2 = components_for(set);
  const auto c2 = combination_coefficients(set);
  const auto grid = sparse_points(set);
  for (std::size_t k = 0; k < grid.size(); ++k)
    EXPECT_NEAR(sparse_eval(c2, comps2, grid.points[k])[0], f_cos(grid.points[k])[0], 1e-10);
}

TEST(SparseMean, AgreesWithMonteCarlo) {
  const IndexSet set = isotropic_index_set(2, 2);
  const auto comps = components_for(set);
  const auto c = combination_coefficients(set);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  std::vector<double> z(2);
  for (int t = 0; t < n; ++t) {
    z[0] = u(rng);
    z[1] = u(rng);
    const double v = sparse_eval(c, comps, z)[0];
    s += v;
    s2 += v * v;
  }
  const double mc = s / n, se = std::sqrt((s2 / n - mc * mc) / n);
  EXPECT_LE(std::abs(sparse_mean(c, comps)[0] - mc), 3 * se);
}

TEST(SparseEval, MissingComponent) {
  const IndexSet set = isotropic_index_set(1, 2);
  std::map<MultiIndex, TensorComponent> comps;
  EXPECT_THROW(sparse_eval(combination_coefficients(set), comps, std::vector<double>{0.0, 0.0}), NotReadyError);
  EXPECT_THROW(sparse_mean(combination_coefficients(set), comps), NotReadyError);
}

TEST(IndexSetText, RoundTrip) {
  const IndexSet set = isotropic_index_set(2, 3);
  const auto c = combination_coefficients(set);
  std::stringstream ss;
  write_index_set(ss, set, &c);
  const auto back = read_index_set(ss);
  EXPECT_EQ(back.set, set);
  ASSERT_TRUE(back.weights.has_value());
  EXPECT_EQ(*back.weights, c);

  std::stringstream plain;
  write_index_set(plain, set);
  const auto back2 = read_index_set(plain);
  EXPECT_EQ(back2.set, set);
  EXPECT_FALSE(back2.weights.has_value());

  std::stringstream bad("0 1\n0 1 2\n");
  EXPECT_THROW(read_index_set(bad), ValidationError);
}
