#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pla/app/config.hpp"

namespace pla::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitSolver = 4;

struct RunContext {
  std::filesystem::path out_dir = ".";
  std::ostream* log = nullptr;  // warnings and progress; may be null
};

// Each command writes its data files plus manifest.json into out_dir and
// returns a process exit code. Data files depend only on the config; the
// manifest additionally records wall-clock time.

/// design.json: constellation, thresholds and analytic error rates for the
/// configured k (or k_i = tag_ratio * ln R).
int run_design(const RunConfig& cfg, const RunContext& ctx);

/// optimize.json and one h_alpha_etot_<E>.csv per total power.
int run_optimize(const RunConfig& cfg, const RunContext& ctx);

/// tradeoff.json and one tradeoff_etot_<E>.csv per total power.
int run_tradeoff(const RunConfig& cfg, const RunContext& ctx);

/// snr_sweep.csv and simulate.json (sweep summary and authentication trials).
int run_simulate(const RunConfig& cfg, const RunContext& ctx);

}  // namespace pla::app
