#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "pla/app/commands.hpp"
#include "pla/errors.hpp"
#include "pla/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> workers;
  std::optional<std::uint64_t> trials;
  std::optional<double> tag_ratio;
  bool full_vector = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file or run manifest");
  sub->add_option("--seed", f.seed, "Master seed (u64)");
  sub->add_option("--out", f.out, "Output directory")->capture_default_str();
  sub->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--trials", f.trials, "Monte Carlo trials per point")
      ->check(CLI::PositiveNumber);
}

pla::app::RunConfig build_config(const Flags& f) {
  pla::app::RunConfig cfg;
  if (!f.config.empty()) cfg = pla::app::load_config(f.config);
  if (f.seed) cfg.sim.master_seed = *f.seed;
  if (f.workers) cfg.sim.workers = *f.workers;
  if (f.trials) cfg.sim.trials = *f.trials;
  if (f.full_vector) cfg.sim.full_vector = true;
  if (f.tag_ratio) {
    cfg.tag_ratio = *f.tag_ratio;
    cfg.k.reset();
  }
  pla::app::resolve(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tag embedding design, optimization and simulation for "
               "non-coherent energy-detection links"};
  app.set_version_flag("--version", std::string(pla::kToolName) + " " + pla::kToolVersion);
  app.require_subcommand(1);

  Flags flags;
  auto* design = app.add_subcommand("design", "Constellation, thresholds and error rates");
  add_common(design, flags);
  design->add_option("--tag-ratio", flags.tag_ratio, "Use k_i = ratio * ln R")
      ->check(CLI::Range(0.0, 1.0));
  auto* optimize = app.add_subcommand("optimize", "Power allocation and H(alpha) curves");
  add_common(optimize, flags);
  auto* tradeoff = app.add_subcommand("tradeoff", "Minimum tag SER versus delta");
  add_common(tradeoff, flags);
  auto* simulate = app.add_subcommand("simulate", "SNR sweep and authentication trials");
  add_common(simulate, flags);
  simulate->add_flag("--full-vector", flags.full_vector,
                     "Draw the channel and noise vectors instead of the energy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pla::app::kExitConfig;
  }

  try {
    const pla::app::RunConfig cfg = build_config(flags);
    pla::app::RunContext ctx;
    ctx.out_dir = flags.out;
    ctx.log = &std::cerr;
    if (*design) return pla::app::run_design(cfg, ctx);
    if (*optimize) return pla::app::run_optimize(cfg, ctx);
    if (*tradeoff) return pla::app::run_tradeoff(cfg, ctx);
    return pla::app::run_simulate(cfg, ctx);
  } catch (const pla::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pla::app::kExitConfig;
  } catch (const pla::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << " (best achievable bound "
              << e.best_achievable_bound() << ")\n";
    return pla::app::kExitInfeasible;
  } catch (const pla::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return pla::app::kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
