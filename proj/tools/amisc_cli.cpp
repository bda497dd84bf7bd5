#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "amisc/amisc.hpp"
#include "amisc/studio/config.hpp"
#include "amisc/studio/study.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> strategy;
  std::optional<double> tau, wmax, kappa;

  amisc::studio::StudyConfig resolve() const {
    amisc::studio::StudyConfig c = config.empty() ? amisc::studio::StudyConfig{} : amisc::studio::load_config(config);
    if (seed) c.seed = *seed;
    if (out) c.out_dir = *out;
    if (strategy) c.strategy = *strategy;
    if (tau) c.tau = *tau;
    if (wmax) c.w_max = *wmax;
    if (kappa) c.kappa = *kappa;
    c.validate();
    return c;
  }
};

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON study configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "validation sample seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--strategy", o.strategy, "single | multilevel | multiindex");
  cmd->add_option("--tau", o.tau, "tolerance on the global error estimate");
  cmd->add_option("--wmax", o.wmax, "work budget");
  cmd->add_option("--kappa", o.kappa, "mean/variance indicator weight in [0,1]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multi-index stochastic collocation studies"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "convergence study for one strategy");
  auto* compare = app.add_subcommand("compare", "convergence studies for several strategies");
  auto* sobol = app.add_subcommand("sobol", "Sobol sensitivity report of the surrogate");
  auto* density = app.add_subcommand("density", "kernel density table of the surrogate outputs");
  for (auto* cmd : {run, compare, sobol, density}) add_flags(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const amisc::studio::StudyConfig cfg = o.resolve();
    if (run->parsed()) {
      const auto r = amisc::studio::run_study(cfg);
      const auto& last = r.convergence.back();
      std::cout << r.strategy << ": " << last.steps << " steps, work " << last.work << ", error";
      for (double e : last.error) std::cout << ' ' << e;
      std::cout << '\n';
    } else if (compare->parsed()) {
      for (const auto& r : amisc::studio::compare_strategies(cfg, cfg.strategies)) {
        const auto& last = r.convergence.back();
        std::cout << r.strategy << ": work " << last.work << ", error " << last.error.front() << '\n';
      }
    } else if (sobol->parsed()) {
      const auto rows = amisc::studio::sobol_report(cfg);
      if (rows.empty()) std::cerr << "warning: surrogate variance is zero, no Sobol indices reported\n";
      std::cout << rows.size() << " subsets written to " << cfg.out_dir << "/sobol.csv\n";
    } else if (density->parsed()) {
      amisc::studio::density_report(cfg);
      std::cout << "density table written to " << cfg.out_dir << "/density.csv\n";
    }
  } catch (const amisc::ModelEvaluationError& e) {
    std::cerr << "model evaluation failed: " << e.what() << " (partial outputs flushed)\n";
    return 3;
  } catch (const amisc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
