#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "pla/errors.hpp"
#include "pla/optimize.hpp"

namespace pla {
namespace {

EmbeddingProblem problem_at(const SystemConfig& cfg, double alpha) {
  const double total = *cfg.total_power;
  SystemConfig sys = cfg;
  sys.message_power = alpha * total;
  sys.total_power.reset();
  EmbeddingProblem p;
  p.base = design_constellation(sys);
  p.antennas = cfg.antennas;
  p.power_budget = (1.0 - alpha) * total;
  p.delta = cfg.delta;
  return p;
}

double tag_free_bound_at(const SystemConfig& cfg, double alpha) {
  return tag_free_bound(problem_at(cfg, alpha));
}

void require_total_power(const SystemConfig& cfg) {
  cfg.validate();
  if (!cfg.total_power) {
    throw ConfigError("system.total_power", "required for power allocation");
  }
}

}  // namespace

std::vector<double> AllocationResult::alpha_grid() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.alpha);
  return out;
}

std::vector<double> AllocationResult::h_values() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.tag_ser);
  return out;
}

AllocationSample evaluate_allocation(const SystemConfig& cfg, double alpha,
                                     const SolverOptions& opts,
                                     SolveResult* inner) {
  require_total_power(cfg);
  AllocationSample s;
  s.alpha = alpha;
  const EmbeddingProblem p = problem_at(cfg, alpha);
  const double bound0 = tag_free_bound(p);
  s.message_ser_upper = bound0;
  if (bound0 > cfg.delta) {
    s.feasible = false;
    return s;
  }
  s.feasible = true;
  const SolveResult r = solve_embedding(p, opts);
  s.status = r.status;
  if (r.status == SolveStatus::infeasible) {
    // Feasible set is {k = 0}: no tag power at all.
    s.tag_ser = 0.5;
  } else {
    s.tag_ser = r.objective;
    s.message_ser_upper = p.delta - r.ser_bound_slack;
  }
  if (inner) *inner = r;
  return s;
}

double find_alpha0(const SystemConfig& cfg, double tolerance) {
  require_total_power(cfg);
  const double at_one = tag_free_bound_at(cfg, 1.0);
  if (at_one > cfg.delta) {
    throw InfeasibleError(
        fmt::format("delta = {:g} is not reachable: the tag-free bound at "
                    "alpha = 1 is {:.6g}",
                    cfg.delta, at_one),
        at_one);
  }
  // The bound tends to (L-1)/L > delta as alpha -> 0.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (tag_free_bound_at(cfg, mid) <= cfg.delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

AllocationResult allocate_power(const SystemConfig& cfg,
                                const AllocationOptions& opts) {
  require_total_power(cfg);
  if (opts.grid_points < 2) {
    throw std::invalid_argument("allocate_power: need at least 2 grid points");
  }
  AllocationResult out;
  out.total_power = *cfg.total_power;
  out.delta = cfg.delta;
  out.alpha0 = find_alpha0(cfg, opts.alpha0_tolerance);

  const int n = opts.grid_points;
  out.samples.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double alpha =
        j == n - 1 ? 1.0 : out.alpha0 + (1.0 - out.alpha0) * j / (n - 1.0);
    out.samples.push_back(evaluate_allocation(cfg, alpha, opts.solver));
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < out.samples.size(); ++j) {
    if (out.samples[j].feasible &&
        out.samples[j].tag_ser < out.samples[best].tag_ser) {
      best = j;
    }
  }

  int local_minima = 0;
  for (std::size_t j = 0; j < out.samples.size(); ++j) {
    const double h = out.samples[j].tag_ser;
    const bool left_ok = j == 0 || out.samples[j - 1].tag_ser > h;
    const bool right_ok =
        j + 1 == out.samples.size() || out.samples[j + 1].tag_ser >= h;
    if (left_ok && right_ok) ++local_minima;
  }
  if (local_minima > 1) {
    out.unimodal = false;
    out.warnings.push_back(fmt::format(
        "sampled H(alpha) has {} local minima; golden-section refinement "
        "only searches around the best sample",
        local_minima));
  }

  // Golden-section refinement on the bracket around the best sample.
  double a = out.samples[best == 0 ? 0 : best - 1].alpha;
  double b = out.samples[std::min(best + 1, out.samples.size() - 1)].alpha;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto h = [&](double alpha) {
    return evaluate_allocation(cfg, alpha, opts.solver).tag_ser;
  };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = h(x1);
  double f2 = h(x2);
  while (b - a > opts.golden_tolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = h(x2);
    }
  }
  double alpha_star = f1 <= f2 ? x1 : x2;
  SolveResult inner;
  AllocationSample refined = evaluate_allocation(cfg, alpha_star, opts.solver, &inner);
  if (!(refined.tag_ser <= out.samples[best].tag_ser)) {
    alpha_star = out.samples[best].alpha;
    refined = evaluate_allocation(cfg, alpha_star, opts.solver, &inner);
  }
  out.alpha_star = alpha_star;
  out.h_star = refined.tag_ser;
  out.best = inner;
  return out;
}

std::vector<TradeoffPoint> tradeoff_curve(const SystemConfig& cfg,
                                          std::span<const double> deltas,
                                          const AllocationOptions& opts) {
  std::vector<double> sorted(deltas.begin(), deltas.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TradeoffPoint> out;
  for (double delta : sorted) {
    TradeoffPoint pt;
    pt.delta = delta;
    SystemConfig c = cfg;
    c.delta = delta;
    try {
      const AllocationResult r = allocate_power(c, opts);
      pt.feasible = true;
      pt.min_tag_ser = r.h_star;
      pt.alpha_star = r.alpha_star;
    } catch (const InfeasibleError& e) {
      pt.best_achievable_bound = e.best_achievable_bound();
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace pla
