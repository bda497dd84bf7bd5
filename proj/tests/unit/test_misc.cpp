#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "amisc/amisc_driver.hpp"
#include "amisc/advection_diffusion.hpp"
#include "amisc/models.hpp"

using namespace amisc;

namespace {

IndexSet random_insertions(std::mt19937_64& rng, std::size_t d, std::size_t count,
                           const std::function<void(const IndexSet&, const MultiIndex&)>& on_insert) {
  IndexSet set;
  std::vector<MultiIndex> frontier{MultiIndex(d)};
  while (set.size() < count && !frontier.empty()) {
    const std::size_t pick = rng() % frontier.size();
    const MultiIndex idx = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    on_insert(set, idx);
    set.insert(idx);
    for (const auto& nb : refine_neighbors(set, idx, MultiIndex(d, 4)))
      if (std::find(frontier.begin(), frontier.end(), nb) == frontier.end()) frontier.push_back(nb);
  }
  return set;
}

// Surrogate over (alpha, beta) for the cosine ladder with the given accepted
// set (inserted in order) and optional active candidate.
MiscSurrogate ladder_surrogate(const ModelEnsemble& e, const std::vector<MultiIndex>& accepted) {
  MiscSurrogate s(1, 1, 1);
  for (const auto& idx : accepted) {
    const MultiIndex alpha = alpha_part(idx, 1);
    s.add_candidate(idx, sample_component(alpha, beta_part(idx, 1), 1,
                                          [&](std::span<const double> z) { return e.evaluate(alpha, z); }));
    if (idx.l1() == 0) s.set_indicator_scale(s.component(idx).values());
    s.commit(s.preview(idx));
  }
  return s;
}

TensorComponent ladder_component(const ModelEnsemble& e, const MultiIndex& idx) {
  const MultiIndex alpha = alpha_part(idx, 1);
  return sample_component(alpha, beta_part(idx, 1), 1, [&](std::span<const double> z) { return e.evaluate(alpha, z); });
}

// Mean and variance of the batch combination by dense quadrature.
std::pair<double, double> dense_moments(const ModelEnsemble& e, const IndexSet& set) {
  const auto c = combination_coefficients(set);
  std::map<MultiIndex, TensorComponent> comps;
  for (const auto& idx : set) comps.emplace(idx, ladder_component(e, idx));
  const auto& q = cc_rule(8);
  double m = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double v = sparse_eval(c, comps, std::vector<double>{q.nodes[k]})[0];
    m += q.quad_weights[k] * v;
    s2 += q.quad_weights[k] * v * v;
  }
  return {m, s2 - m * m};
}

}  // namespace

TEST(IndicatorGamma, Examples) {
  RefinementRecord r{MultiIndex{0}, {0.3}, {0.7}, 2.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(indicator_gamma(r, 1.0), 0.15);
  EXPECT_DOUBLE_EQ(indicator_gamma(r, 0.0), 0.35);
  EXPECT_DOUBLE_EQ(indicator_gamma(r, 0.5), 0.25);
  RefinementRecord multi{MultiIndex{0}, {1e-3, 2e-3, 3e-3, 4e-3}, {0, 0, 0, 0}, 1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(indicator_gamma(multi, 1.0), 4e-3);
  EXPECT_THROW(indicator_gamma(r, 1.5), ValidationError);
  EXPECT_THROW(indicator_gamma(r, -0.1), ValidationError);
  r.delta_w = 0.0;
  EXPECT_THROW(indicator_gamma(r, 0.5), ValidationError);
}

TEST(UpdateCoefficients, Examples) {
  const auto c0 = update_coefficients({}, {}, MultiIndex{0, 0});
  EXPECT_EQ(c0, (CombinationWeights{{MultiIndex{0, 0}, 1}}));
  const auto c1 = update_coefficients(c0, IndexSet{MultiIndex{0, 0}}, MultiIndex{1, 0});
  EXPECT_EQ(c1, (CombinationWeights{{MultiIndex{0, 0}, 0}, {MultiIndex{1, 0}, 1}}));
  EXPECT_THROW(update_coefficients(c0, IndexSet{MultiIndex{0, 0}}, MultiIndex{1, 1}), ValidationError);
  EXPECT_THROW(update_coefficients(c0, IndexSet{MultiIndex{0, 0}}, MultiIndex{0, 0}), ValidationError);
}

TEST(UpdateCoefficients, MatchesBatchFormulaOnRandomSequences) {
  std::mt19937_64 rng(77);
  for (int seq = 0; seq < 300; ++seq) {
    const std::size_t d = 1 + rng() % 5;
    CombinationWeights inc;
    random_insertions(rng, d, 1 + rng() % 30, [&](const IndexSet& set, const MultiIndex& idx) {
      inc = update_coefficients(inc, set, idx);
      IndexSet grown = set;
      grown.insert(idx);
      ASSERT_TRUE(is_downward_closed(grown));
      ASSERT_EQ(inc, combination_coefficients(grown));
    });
  }
}

TEST(RefineNeighbors, Examples) {
  EXPECT_EQ(refine_neighbors(IndexSet{MultiIndex{0, 0}}, MultiIndex{0, 0}, MultiIndex{3, 3}),
            (std::vector<MultiIndex>{MultiIndex{1, 0}, MultiIndex{0, 1}}));
  // Two-step example: (1,1) is still active, so (1,2) is not admissible.
  const IndexSet accepted{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}, MultiIndex{0, 2}};
  EXPECT_EQ(refine_neighbors(accepted, MultiIndex{0, 2}, MultiIndex{3, 8}), (std::vector<MultiIndex>{MultiIndex{0, 3}}));
  // Bounds face.
  EXPECT_EQ(refine_neighbors(accepted, MultiIndex{0, 2}, MultiIndex{3, 2}), std::vector<MultiIndex>{});
  EXPECT_EQ(refine_neighbors(IndexSet{MultiIndex{0, 0}}, MultiIndex{0, 0}, MultiIndex{0, 3}),
            (std::vector<MultiIndex>{MultiIndex{0, 1}}));
  EXPECT_THROW(refine_neighbors(accepted, MultiIndex{1, 1}, MultiIndex{3, 3}), ValidationError);
}

TEST(DeltaWork, NewPointCounts) {
  const auto e = models::cosine_ladder({0.2, 0.1, 0.05, 0.01}, {1.0, 3.0, 9.0, 27.0});
  MiscSurrogate empty(1, 1, 1);
  EXPECT_EQ(delta_work(e, empty, MultiIndex{0, 0}), 1.0);

  const auto s = ladder_surrogate(e, {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}});
  EXPECT_EQ(delta_work(e, s, MultiIndex{0, 2}), 1.0 * 2);
  EXPECT_EQ(delta_work(e, s, MultiIndex{1, 1}), 3.0 * 2);
  EXPECT_EQ(delta_work(e, s, MultiIndex{2, 0}), 9.0 * 1);
  const auto s2 = ladder_surrogate(e, {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}, MultiIndex{0, 2}});
  EXPECT_EQ(delta_work(e, s2, MultiIndex{0, 3}), 1.0 * 4);
}

TEST(DeltaErrorIndicators, ZeroAndConstantComponents) {
  MiscSurrogate s(0, 2, 1);
  TensorComponent zero(MultiIndex{}, MultiIndex{0, 0}, 1);
  zero.set_values({0.0});
  const auto [em, ev] = delta_error_indicators(s, MultiIndex{0, 0}, zero);
  EXPECT_EQ(em[0], 0.0);
  EXPECT_EQ(ev[0], 0.0);

  TensorComponent constant(MultiIndex{}, MultiIndex{0, 0}, 1);
  constant.set_values({2.0});
  s.set_indicator_scale(constant.values());
  const auto [cm, cv] = delta_error_indicators(s, MultiIndex{0, 0}, constant);
  EXPECT_EQ(cm[0], 1.0);  // |2 - 0| / |2|
  EXPECT_EQ(cv[0], 0.0);
  RefinementRecord r{MultiIndex{0, 0}, cm, cv, 1.0, 0.0, 0.0};
  EXPECT_EQ(indicator_gamma(r, 0.0), 0.0);
}

TEST(DeltaErrorIndicators, MatchDenseQuadratureAndShrinkWithFidelity) {
  const auto e = models::cosine_ladder();
  std::vector<MultiIndex> first;
  for (int b = 0; b <= 3; ++b) first.push_back(MultiIndex{0, b});
  const auto s1 = ladder_surrogate(e, first);
  const MultiIndex cand1{1, 0};
  const auto [m1, v1] = delta_error_indicators(s1, cand1, ladder_component(e, cand1));

  IndexSet set1(first.begin(), first.end());
  IndexSet grown1 = set1;
  grown1.insert(cand1);
  const auto before = dense_moments(e, set1), after = dense_moments(e, grown1);
  // The coarsest ladder model vanishes at the center, so the normalization falls back to 1.
  double f00 = std::abs(e.evaluate(MultiIndex{0}, std::vector<double>{0.0})[0]);
  if (f00 < 1e-12) f00 = 1.0;
  EXPECT_NEAR(m1[0], std::abs(after.first - before.first) / f00, 1e-12);
  EXPECT_NEAR(v1[0], std::abs(after.second - before.second) / (f00 * f00), 1e-12);
  EXPECT_NEAR(s1.mean()[0], before.first, 1e-13);
  EXPECT_NEAR(s1.variance()[0], before.second, 1e-13);

  const MultiIndex deeper{0, 4};
  const auto [md, vd] = delta_error_indicators(s1, deeper, ladder_component(e, deeper));
  IndexSet grown_d = set1;
  grown_d.insert(deeper);
  const auto after_d = dense_moments(e, grown_d);
  EXPECT_GT(vd[0], 0.0);
  EXPECT_NEAR(md[0], std::abs(after_d.first - before.first), 1e-12);
  EXPECT_NEAR(vd[0], std::abs(after_d.second - before.second), 1e-12);

  std::vector<MultiIndex> second = first;
  for (int b = 0; b <= 3; ++b) second.push_back(MultiIndex{1, b});
  const auto s2 = ladder_surrogate(e, second);
  const MultiIndex cand2{2, 0};
  const auto [m2, v2] = delta_error_indicators(s2, cand2, ladder_component(e, cand2));
  EXPECT_LT(m2[0], m1[0]);
}

TEST(MiscSurrogate, RejectsInvalidUse) {
  MiscSurrogate s(1, 1, 1);
  TensorComponent c(MultiIndex{0}, MultiIndex{0}, 1);
  c.set_values({1.0});
  EXPECT_THROW(s.evaluate(std::vector<double>{0.0}), NotReadyError);
  EXPECT_THROW(s.add_candidate(MultiIndex{0}, c), ValidationError);  // wrong combined length
  s.add_candidate(MultiIndex{0, 0}, c);
  EXPECT_THROW(s.add_candidate(MultiIndex{0, 0}, c), ValidationError);
  EXPECT_THROW(s.component(MultiIndex{1, 0}), NotReadyError);
  EXPECT_THROW(s.preview(MultiIndex{1, 0}), ValidationError);
  EXPECT_THROW(allocation_profile(s, [](const MultiIndex&) { return 1.0; }), ValidationError);
}

TEST(AllocationProfile, SingleIndexAndFractions) {
  const auto e = models::cosine_ladder();
  const auto one = ladder_surrogate(e, {MultiIndex{0, 0}});
  const auto p1 = allocation_profile(one, e.cost);
  ASSERT_EQ(p1.size(), 1u);
  EXPECT_EQ(p1.at(MultiIndex{0}).samples, 1u);
  EXPECT_EQ(p1.at(MultiIndex{0}).work_fraction, 1.0);

  const auto s = ladder_surrogate(e, {MultiIndex{0, 0}, MultiIndex{0, 1}, MultiIndex{1, 0}, MultiIndex{0, 2}, MultiIndex{1, 1}});
  const auto p = allocation_profile(s, e.cost);
  EXPECT_EQ(p.at(MultiIndex{0}).samples, 5u);
  EXPECT_EQ(p.at(MultiIndex{1}).samples, 3u);
  double total = 0.0;
  for (const auto& [a, entry] : p) total += entry.work_fraction;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(p.at(MultiIndex{0}).work_fraction, 5.0 / 11.0, 1e-15);
}

TEST(MultilevelModelSet, Diagonal) {
  EXPECT_EQ(multilevel_model_set(1, 3), std::vector<MultiIndex>{MultiIndex(3)});
  const auto five = multilevel_model_set(5, 3);
  ASSERT_EQ(five.size(), 5u);
  for (int j = 0; j < 5; ++j) EXPECT_EQ(five[static_cast<std::size_t>(j)], MultiIndex(3, j));
  EXPECT_THROW(multilevel_model_set(0, 3), ValidationError);

  models::AdvectionDiffusionConfig cfg;
  cfg.max_level = 2;
  const auto base = models::advection_diffusion_ensemble(cfg);
  const auto ml = multilevel_ensemble(base, 3);
  EXPECT_EQ(ml.n_alpha, 1u);
  EXPECT_EQ(ml.alpha_bounds, MultiIndex{2});
  EXPECT_EQ(ml.cost(MultiIndex{2}), base.cost(MultiIndex{2, 2, 2}));
  EXPECT_THROW(multilevel_ensemble(base, 4), ValidationError);
}
