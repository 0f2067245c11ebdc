#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pla/constellation.hpp"
#include "pla/embedding.hpp"

namespace pla {

/// Tag-power design for a fixed message constellation:
///
///   minimize   (1 / 2L) sum_i F(k_i)
///   subject to (1 / 2L) sum_i A_i (e^{k_i} - 1) <= power_budget
///              (1 / L) sum_{i < L-1} W(k_i)    <= delta
///              0 < k_i < ln R
///
/// with F(k) = pairwise_error(N, k) (tag errors) and
/// W(k) = pairwise_error(N, ln R - k) (message-SER bound terms).
struct EmbeddingProblem {
  MessageConstellation base;
  int antennas = 128;
  double power_budget = 0.0;
  double delta = 1e-5;

  double log_ratio() const;
  std::size_t size() const { return base.size(); }
};

/// Value with first and second derivative of a scalar function of k.
struct ScalarDerivatives {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// F(k) and its derivatives. F'(k) = -N v f_Z(N v) and
/// F''(k) = N^2 v'(k) (v - 1) f_Z(N v), v = v(k), which is what chaining
/// f_Z through u and v reduces to once f_Z(N v) / f_Z(N u) = e^{-k} is used.
ScalarDerivatives tag_error_term(int antennas, double k);

/// W(k) with W'(k) = N^N g^N e^{-N g} / (N-1)! and
/// W''(k) = N^{N+1} g^{N-1} e^{-N g} g_k (1 - g) / (N-1)!, g = g(e^k) and
/// g_k its k-derivative.
ScalarDerivatives bound_term(int antennas, double log_ratio, double k);

/// Separable function value, gradient and diagonal Hessian.
struct SeparableEval {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian_diag;
};

/// Objective (1 / 2L) sum F(k_i). Throws std::domain_error unless k lies
/// strictly inside the box.
SeparableEval objective_and_derivatives(std::span<const double> k,
                                        const EmbeddingProblem& p);

struct ConstraintEval {
  double power_slack = 0.0;      // budget - power(k)
  double ser_bound_slack = 0.0;  // delta - bound(k)
  SeparableEval power;           // left side of the budget constraint
  SeparableEval ser_bound;       // left side of the message-SER constraint
};

ConstraintEval constraint_functions(std::span<const double> k,
                                    const EmbeddingProblem& p);

/// Message-SER bound with zero tag power (k -> 0+), the most favourable
/// value reachable inside the box.
double tag_free_bound(const EmbeddingProblem& p);

struct SolverOptions {
  double initial_t = 1.0;
  double barrier_growth = 10.0;
  double gap_tolerance = 1e-8;  // relative to the objective
  double centering_tolerance = 1e-8;
  int max_newton_steps = 500;
  int max_total_steps = 20000;
};

enum class SolveStatus { optimal, infeasible, max_iter };

std::string to_string(SolveStatus s);

struct SolveResult {
  std::vector<double> k_opt;
  double objective = 0.5;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::infeasible;
  double power_slack = 0.0;
  double ser_bound_slack = 0.0;
  double duality_gap = 0.0;
  std::string detail;
};

/// Log-barrier interior-point method. Every inequality (both constraints and
/// the 2L box sides) enters the barrier; each Newton system is diagonal plus
/// two rank-one terms and is solved in O(L) with the Woodbury identity.
SolveResult solve_embedding(const EmbeddingProblem& p,
                            const SolverOptions& opts = {});

struct AllocationOptions {
  int grid_points = 64;
  double alpha0_tolerance = 1e-6;
  double golden_tolerance = 1e-7;
  SolverOptions solver;
};

struct AllocationSample {
  double alpha = 0.0;
  double tag_ser = 0.5;            // H(alpha)
  double message_ser_upper = 0.0;  // bound at the solved k
  bool feasible = false;
  SolveStatus status = SolveStatus::infeasible;
};

struct AllocationResult {
  double total_power = 0.0;
  double delta = 0.0;
  double alpha0 = 0.0;
  double alpha_star = 1.0;
  double h_star = 0.5;
  std::vector<AllocationSample> samples;  // coarse grid, alpha ascending
  SolveResult best;                       // inner solve at alpha_star
  bool unimodal = true;
  std::vector<std::string> warnings;

  std::vector<double> alpha_grid() const;
  std::vector<double> h_values() const;
};

/// H(alpha) for one allocation factor: solve_embedding with E_m = alpha E_tot
/// and tag budget (1 - alpha) E_tot. When the feasible set collapses to
/// k = 0 (zero budget, or the bound exactly at delta) the value is the
/// guessing limit 1/2.
AllocationSample evaluate_allocation(const SystemConfig& cfg, double alpha,
                                     const SolverOptions& opts,
                                     SolveResult* inner = nullptr);

/// Smallest alpha whose tag-free design meets the bound, by bisection.
/// Throws InfeasibleError when even alpha = 1 misses delta.
double find_alpha0(const SystemConfig& cfg, double tolerance = 1e-6);

/// Coarse grid over [alpha0, 1] refined by golden-section search around the
/// best sample. Requires cfg.total_power.
AllocationResult allocate_power(const SystemConfig& cfg,
                                const AllocationOptions& opts = {});

struct TradeoffPoint {
  double delta = 0.0;
  bool feasible = false;
  double min_tag_ser = 0.5;
  double alpha_star = 1.0;
  double best_achievable_bound = 0.0;  // filled when infeasible
};

/// allocate_power per delta, ascending in delta. Infeasible deltas are
/// recorded, not thrown.
std::vector<TradeoffPoint> tradeoff_curve(const SystemConfig& cfg,
                                          std::span<const double> deltas,
                                          const AllocationOptions& opts = {});

}  // namespace pla
