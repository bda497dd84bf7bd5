#pragma once

/// \file
/// Study configuration (JSON) and construction of the built-in ensembles.
///
/// Schema (all keys optional):
///   model: {id: "cosine_2d" | "cosine_ladder" | "linear" | "advection_diffusion", ...model keys}
///     cosine_ladder:       eps [reals], costs [reals]
///     linear:              coefficients [reals]
///     advection_diffusion: n_kle, max_level, correlation_length, base_mesh, base_dt, final_time
///   strategy: "single" | "multilevel" | "multiindex"
///   kappa, tau, w_max, max_steps, max_stochastic_level, threads
///   validation_samples, seed, out, cache_dir, truth_alpha [ints], checkpoint_ratio
///   density_samples, density_points, strategies [names] (for compare)

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amisc/advection_diffusion.hpp"
#include "amisc/amisc_driver.hpp"
#include "amisc/ensemble.hpp"
#include "amisc/errors.hpp"
#include "amisc/models.hpp"

namespace amisc::studio {

using json = nlohmann::json;

struct StudyConfig {
  json model = json{{"id", "cosine_2d"}};
  std::string strategy = "multiindex";
  double kappa = 0.5;
  double tau = 0.0;
  double w_max = 0.0;
  std::size_t max_steps = 0;
  int max_stochastic_level = 8;
  unsigned threads = 1;
  std::size_t validation_samples = 1000;
  std::uint64_t seed = 0;
  std::string out_dir = "amisc_out";
  std::string cache_dir;  // empty: <out_dir>/cache
  std::optional<std::vector<int>> truth_alpha;
  double checkpoint_ratio = 1.25;
  std::size_t density_samples = 10000;
  std::size_t density_points = 200;
  std::vector<std::string> strategies = {"single", "multilevel", "multiindex"};

  AmiscOptions amisc_options() const {
    AmiscOptions o;
    o.kappa = kappa;
    o.tau = tau;
    o.w_max = w_max;
    o.max_steps = max_steps;
    o.max_stochastic_level = max_stochastic_level;
    o.threads = threads;
    return o;
  }

  std::string resolved_cache_dir() const { return cache_dir.empty() ? out_dir + "/cache" : cache_dir; }

  void validate() const {
    if (validation_samples < 1) throw ValidationError("validation_samples must be at least 1");
    if (!(checkpoint_ratio > 1.0)) throw ValidationError("checkpoint_ratio must exceed 1");
    if (strategy != "single" && strategy != "multilevel" && strategy != "multiindex")
      throw ValidationError("unknown strategy: " + strategy);
    amisc_options().validate();
  }
};

inline StudyConfig config_from_json(const json& j) {
  StudyConfig c;
  if (j.contains("model")) c.model = j.at("model");
  c.strategy = j.value("strategy", c.strategy);
  c.kappa = j.value("kappa", c.kappa);
  c.tau = j.value("tau", c.tau);
  c.w_max = j.value("w_max", c.w_max);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.max_stochastic_level = j.value("max_stochastic_level", c.max_stochastic_level);
  c.threads = j.value("threads", c.threads);
  c.validation_samples = j.value("validation_samples", c.validation_samples);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out", c.out_dir);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  if (j.contains("truth_alpha")) c.truth_alpha = j.at("truth_alpha").get<std::vector<int>>();
  c.checkpoint_ratio = j.value("checkpoint_ratio", c.checkpoint_ratio);
  c.density_samples = j.value("density_samples", c.density_samples);
  c.density_points = j.value("density_points", c.density_points);
  if (j.contains("strategies")) c.strategies = j.at("strategies").get<std::vector<std::string>>();
  return c;
}

inline StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  return config_from_json(json::parse(in));
}

inline models::AdvectionDiffusionConfig advection_config(const json& m) {
  models::AdvectionDiffusionConfig c;
  c.n_kle = m.value("n_kle", c.n_kle);
  c.max_level = m.value("max_level", c.max_level);
  c.correlation_length = m.value("correlation_length", c.correlation_length);
  c.base_mesh = m.value("base_mesh", c.base_mesh);
  c.base_dt = m.value("base_dt", c.base_dt);
  c.final_time = m.value("final_time", c.final_time);
  return c;
}

inline ModelEnsemble make_ensemble(const json& m) {
  const std::string id = m.value("id", std::string("cosine_2d"));
  if (id == "cosine_2d") return models::cosine_2d();
  if (id == "cosine_ladder") {
    std::vector<double> eps = m.value("eps", std::vector<double>{1.0 / 5, 1.0 / 10, 1.0 / 20});
    return models::cosine_ladder(eps, m.value("costs", std::vector<double>{}));
  }
  if (id == "linear") return models::linear(m.value("coefficients", std::vector<double>{1.0}));
  if (id == "advection_diffusion") return models::advection_diffusion_ensemble(advection_config(m));
  throw ValidationError("unknown model id: " + id);
}

/// Reference model used for validation errors: the exact limit for the cosine
/// ladder, otherwise the ensemble at `truth_alpha` (default: finest declared model).
inline std::vector<double> evaluate_truth(const ModelEnsemble& e, const json& m,
                                                            const std::optional<std::vector<int>>& truth_alpha,
                                                            std::span<const double> z) {
  if (m.value("id", std::string()) == "cosine_ladder") return {models::cosine_ladder_truth(z[0])};
  const MultiIndex alpha = truth_alpha ? MultiIndex(*truth_alpha) : e.top_alpha();
  return e.evaluate(alpha, z);
}

/// The ensemble driven by a strategy: single = finest model only,
/// multilevel = diagonal hierarchy, multiindex = full ensemble.
inline ModelEnsemble strategy_ensemble(const ModelEnsemble& base, const std::string& strategy) {
  if (strategy == "multiindex") return base;
  if (strategy == "single") return fixed_fidelity(base, base.top_alpha());
  if (strategy == "multilevel") {
    const MultiIndex& b = base.alpha_bounds;
    for (int v : b)
      if (v != b[0]) throw ValidationError("multilevel strategy needs equal bounds in every fidelity dimension");
    return multilevel_ensemble(base, b[0] + 1);
  }
  throw ValidationError("unknown strategy: " + strategy);
}

}  // namespace amisc::studio
