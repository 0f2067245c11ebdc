#include "pla/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "pla/numerics.hpp"

namespace pla {
namespace {

// Objective values below this are treated as this for the stopping gap.
constexpr double kGapFloor = 1e-30;

// dv/dk for v(k) = k e^k / (e^k - 1).
double threshold_over_low_d1(double k) {
  if (std::abs(k) < 1e-2) {
    const double k2 = k * k;
    return 0.5 + k / 6.0 - k * k2 / 180.0 + k * k2 * k2 / 5040.0;
  }
  const double em1 = std::expm1(k);
  return std::exp(k) * (em1 - k) / (em1 * em1);
}

void check_box(std::span<const double> k, const EmbeddingProblem& p) {
  if (k.size() != p.size()) {
    throw std::invalid_argument("expected " + std::to_string(p.size()) +
                                " tag exponents, got " + std::to_string(k.size()));
  }
  const double log_r = p.log_ratio();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0 && k[i] < log_r)) {
      throw std::domain_error("k[" + std::to_string(i) +
                              "] is on or outside the box (0, ln R)");
    }
  }
}

SeparableEval zeros(std::size_t n) {
  SeparableEval e;
  e.gradient.assign(n, 0.0);
  e.hessian_diag.assign(n, 0.0);
  return e;
}

bool strictly_inside(std::span<const double> k, double log_r) {
  return std::all_of(k.begin(), k.end(),
                     [log_r](double x) { return x > 0.0 && x < log_r; });
}

}  // namespace

double EmbeddingProblem::log_ratio() const { return std::log(base.ratio); }

ScalarDerivatives tag_error_term(int antennas, double k) {
  const double nn = antennas;
  const double v = threshold_over_low(k);
  const double density = chi2_pdf(antennas, nn * v);
  ScalarDerivatives d;
  d.value = pairwise_error(antennas, k);
  d.d1 = -nn * v * density;
  d.d2 = nn * nn * threshold_over_low_d1(k) * (v - 1.0) * density;
  return d;
}

ScalarDerivatives bound_term(int antennas, double log_ratio, double k) {
  const double nn = antennas;
  const double s = log_ratio - k;  // ln(R / r)
  const double g = threshold_over_low(s);
  // g_k = R [e^k - R + e^k (ln R - k)] / (R - e^k)^2, rewritten in s so it
  // stays accurate as e^k approaches R.
  const double g_k = -threshold_over_low_d1(s);
  ScalarDerivatives d;
  d.value = pairwise_error(antennas, s);
  d.d1 = std::exp(nn * std::log(nn) + nn * std::log(g) - nn * g -
                  std::lgamma(nn));
  d.d2 = nn * d.d1 * g_k * (1.0 - g) / g;
  return d;
}

SeparableEval objective_and_derivatives(std::span<const double> k,
                                        const EmbeddingProblem& p) {
  check_box(k, p);
  const std::size_t n = p.size();
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  SeparableEval e = zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ScalarDerivatives t = tag_error_term(p.antennas, k[i]);
    e.value += scale * t.value;
    e.gradient[i] = scale * t.d1;
    e.hessian_diag[i] = scale * t.d2;
  }
  return e;
}

ConstraintEval constraint_functions(std::span<const double> k,
                                    const EmbeddingProblem& p) {
  check_box(k, p);
  const std::size_t n = p.size();
  const double log_r = p.log_ratio();
  const double power_scale = 1.0 / (2.0 * static_cast<double>(n));
  const double bound_scale = 1.0 / static_cast<double>(n);
  ConstraintEval c;
  c.power = zeros(n);
  c.ser_bound = zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double level = p.base.levels[i];
    c.power.value += power_scale * level * std::expm1(k[i]);
    c.power.gradient[i] = power_scale * level * std::exp(k[i]);
    c.power.hessian_diag[i] = c.power.gradient[i];
    if (i + 1 < n) {
      const ScalarDerivatives w = bound_term(p.antennas, log_r, k[i]);
      c.ser_bound.value += bound_scale * w.value;
      c.ser_bound.gradient[i] = bound_scale * w.d1;
      c.ser_bound.hessian_diag[i] = bound_scale * w.d2;
    }
  }
  c.power_slack = p.power_budget - c.power.value;
  c.ser_bound_slack = p.delta - c.ser_bound.value;
  return c;
}

double tag_free_bound(const EmbeddingProblem& p) {
  const double n = static_cast<double>(p.size());
  return (n - 1.0) / n * pairwise_error(p.antennas, p.log_ratio());
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

SolveResult solve_embedding(const EmbeddingProblem& p, const SolverOptions& opts) {
  SolveResult res;
  const std::size_t n = p.size();
  const double log_r = p.log_ratio();
  res.k_opt.assign(n, 0.0);

  if (!(p.power_budget > 0.0)) {
    res.detail = "zero tag budget";
    return res;
  }
  if (!(p.delta > 0.0 && p.delta <= 1.0)) {
    throw std::invalid_argument("solve_embedding: delta must lie in (0, 1]");
  }
  const double bound0 = tag_free_bound(p);
  if (!(bound0 < p.delta)) {
    res.detail = "message-SER bound exceeds delta even without tags";
    return res;
  }

  // Both constraints increase in every coordinate, so the least-violating
  // corner of the box is k -> 0 and a strictly feasible point exists on the
  // diagonal whenever one exists at all.
  std::vector<double> k(n);
  bool found = false;
  for (double theta = 0.5; theta > 1e-300; theta *= 0.5) {
    std::fill(k.begin(), k.end(), theta * log_r);
    if (!strictly_inside(k, log_r)) break;
    const ConstraintEval c = constraint_functions(k, p);
    if (c.power_slack > 0.0 && c.ser_bound_slack > 0.0) {
      found = true;
      break;
    }
  }
  if (!found) {
    res.detail = "no strictly feasible point";
    return res;
  }

  const double m = 2.0 + 2.0 * static_cast<double>(n);
  double t = opts.initial_t;

  auto barrier = [&](std::span<const double> x) -> std::optional<double> {
    if (!strictly_inside(x, log_r)) return std::nullopt;
    const ConstraintEval c = constraint_functions(x, p);
    if (!(c.power_slack > 0.0 && c.ser_bound_slack > 0.0)) return std::nullopt;
    const SeparableEval f = objective_and_derivatives(x, p);
    double v = t * f.value - std::log(c.power_slack) - std::log(c.ser_bound_slack);
    for (double xi : x) v -= std::log(xi) + std::log(log_r - xi);
    return v;
  };

  std::vector<double> grad(n), diag(n), u1(n), u2(n), step(n), trial(n);
  std::vector<double> scratch(n);
  // Newton step of the barrier function at x; returns the squared decrement.
  auto newton = [&](std::span<const double> x, std::vector<double>& dx) {
    const SeparableEval f = objective_and_derivatives(x, p);
    const ConstraintEval c = constraint_functions(x, p);
    const double ps = c.power_slack;
    const double bs = c.ser_bound_slack;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = x[i];
      const double hi = log_r - x[i];
      u1[i] = c.power.gradient[i] / ps;
      u2[i] = c.ser_bound.gradient[i] / bs;
      grad[i] = t * f.gradient[i] + u1[i] + u2[i] - 1.0 / lo + 1.0 / hi;
      diag[i] = t * f.hessian_diag[i] + c.power.hessian_diag[i] / ps +
                c.ser_bound.hessian_diag[i] / bs + 1.0 / (lo * lo) +
                1.0 / (hi * hi);
    }
    // (D + u1 u1^T + u2 u2^T) dx = -grad via Woodbury with a 2x2 core.
    double m11 = 1.0, m12 = 0.0, m22 = 1.0, r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = -grad[i] / diag[i];
      m11 += u1[i] * u1[i] / diag[i];
      m12 += u1[i] * u2[i] / diag[i];
      m22 += u2[i] * u2[i] / diag[i];
      r1 += u1[i] * y;
      r2 += u2[i] * y;
    }
    const double det = m11 * m22 - m12 * m12;
    const double w1 = (m22 * r1 - m12 * r2) / det;
    const double w2 = (m11 * r2 - m12 * r1) / det;
    double decrement2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = (-grad[i] - u1[i] * w1 - u2[i] * w2) / diag[i];
      decrement2 -= grad[i] * dx[i];
    }
    return decrement2;
  };

  bool exhausted = false;
  int steps = 0;
  for (;;) {
    // Centering at the current t.
    for (int it = 0; it < opts.max_newton_steps; ++it) {
      const double decrement2 = newton(k, step);
      if (decrement2 / 2.0 <= opts.centering_tolerance) break;

      const double phi0 = *barrier(k);
      bool accepted = false;
      for (double s = 1.0; s > 1e-20; s *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = k[i] + s * step[i];
        const auto phi = barrier(trial);
        if (phi && *phi <= phi0 - 0.25 * s * decrement2) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Near the centre the barrier value is below its own rounding error
        // at large t; fall back to asking for a smaller Newton decrement.
        for (double s = 1.0; s > 1e-6; s *= 0.5) {
          for (std::size_t i = 0; i < n; ++i) trial[i] = k[i] + s * step[i];
          if (barrier(trial) && newton(trial, scratch) < decrement2) {
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) break;
      k = trial;
      if (++steps >= opts.max_total_steps) {
        exhausted = true;
        break;
      }
    }
    // Relative gap: tag SERs far below the absolute tolerance still need
    // the constraints pushed to their limits.
    const double scale = std::max(objective_and_derivatives(k, p).value, kGapFloor);
    if (exhausted || m / t < opts.gap_tolerance * scale) break;
    t *= opts.barrier_growth;
  }

  // Multipliers from one more Newton step, lambda_j = (1 + g_j' dx / s_j) /
  // (t s_j); with them the Lagrangian gradient only keeps the curvature
  // term times dx.
  newton(k, step);
  const SeparableEval f = objective_and_derivatives(k, p);
  const ConstraintEval c = constraint_functions(k, p);
  double gp = 0.0;
  double gb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gp += c.power.gradient[i] * step[i];
    gb += c.ser_bound.gradient[i] * step[i];
  }
  const double lam_p = (1.0 + gp / c.power_slack) / (t * c.power_slack);
  const double lam_b = (1.0 + gb / c.ser_bound_slack) / (t * c.ser_bound_slack);
  double stationarity = 0.0;
  double complementarity = std::max(std::abs(lam_p * c.power_slack),
                                    std::abs(lam_b * c.ser_bound_slack));
  double dual_infeasibility = std::max({0.0, -lam_p, -lam_b});
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = k[i];
    const double hi = log_r - k[i];
    const double lam_lo = (1.0 - step[i] / lo) / (t * lo);
    const double lam_hi = (1.0 + step[i] / hi) / (t * hi);
    const double r = f.gradient[i] + lam_p * c.power.gradient[i] +
                     lam_b * c.ser_bound.gradient[i] - lam_lo + lam_hi;
    stationarity = std::max(stationarity, std::abs(r));
    complementarity = std::max({complementarity, std::abs(lam_lo * lo),
                                std::abs(lam_hi * hi)});
    dual_infeasibility = std::max({dual_infeasibility, -lam_lo, -lam_hi});
  }
  res.k_opt = k;
  res.objective = f.value;
  res.power_slack = c.power_slack;
  res.ser_bound_slack = c.ser_bound_slack;
  res.duality_gap = m / t;
  res.kkt_residual =
      std::max({stationarity, complementarity, dual_infeasibility});
  res.iterations = steps;
  if (exhausted) {
    res.status = SolveStatus::max_iter;
    res.detail = "Newton step limit reached";
  } else if (res.kkt_residual >= 1e-6) {
    res.status = SolveStatus::max_iter;
    res.detail = "KKT residual above 1e-6";
  } else {
    res.status = SolveStatus::optimal;
  }
  return res;
}

}  // namespace pla
