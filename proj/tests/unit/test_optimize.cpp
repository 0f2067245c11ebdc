#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "pla/errors.hpp"
#include "pla/optimize.hpp"

using namespace pla;

namespace {

MessageConstellation make(int size, double message_power) {
  SystemConfig s;
  s.constellation_size = size;
  s.message_power = message_power;
  return design_constellation(s);
}

EmbeddingProblem problem(int size, double message_power, int antennas, double budget,
                         double delta = 1e-5) {
  EmbeddingProblem p;
  p.base = make(size, message_power);
  p.antennas = antennas;
  p.power_budget = budget;
  p.delta = delta;
  return p;
}

// True when |analytic - fd| is within 1e-4 relative or within what a
// difference quotient with step h can resolve given the value's rounding.
bool fd_agrees(double analytic, double fd, double value_scale, double h) {
  const double noise = 1e3 * 2.2e-16 * std::abs(value_scale) / h;
  return std::abs(analytic - fd) < std::max(1e-4 * std::abs(analytic), 10 * noise);
}

// Fourth-order central differences of a separable evaluator, one coordinate.
template <class Eval>
void check_separable(const Eval& eval, std::vector<double> k, std::size_t i, double h) {
  const SeparableEval at = eval(k);
  const double k0 = k[i];
  auto at_offset = [&](double d) {
    k[i] = k0 + d;
    return eval(k);
  };
  const SeparableEval p1 = at_offset(h), m1 = at_offset(-h);
  const SeparableEval p2 = at_offset(2 * h), m2 = at_offset(-2 * h);
  const double g = (8 * (p1.value - m1.value) - (p2.value - m2.value)) / (12 * h);
  const double hess = (8 * (p1.gradient[i] - m1.gradient[i]) -
                       (p2.gradient[i] - m2.gradient[i])) / (12 * h);
  CHECK(fd_agrees(at.gradient[i], g, at.value, h));
  CHECK(fd_agrees(at.hessian_diag[i], hess, at.gradient[i], h));
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("derivatives match central differences") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int points = 0;
  for (int n : {16, 128}) {
    for (int l : {2, 4}) {
      for (double em : {1.0, 10.0}) {
        const EmbeddingProblem p = problem(l, em, n, 5.0, 0.1);
        const double lr = p.log_ratio();
        const double h = 1e-4 * lr;
        for (int rep = 0; rep < 125; ++rep) {
          std::vector<double> k(p.size());
          for (auto& x : k) x = u(gen) * lr;
          const std::size_t i = gen() % p.size();
          check_separable([&](const std::vector<double>& x) { return objective_and_derivatives(x, p); }, k, i, h);
          check_separable([&](const std::vector<double>& x) { return constraint_functions(x, p).power; }, k, i, h);
          if (i + 1 < p.size()) {
            check_separable([&](const std::vector<double>& x) { return constraint_functions(x, p).ser_bound; }, k, i, h);
          }
          ++points;
        }
      }
    }
  }
  CHECK(points == 1000);
}

TEST_CASE("scalar W derivative against differences") {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int n : {16, 128}) {
    const double lr = std::log(make(4, 10.0).ratio);
    const double h = 1e-6 * lr;
    for (int rep = 0; rep < 500; ++rep) {
      const double k = u(gen) * lr;
      const auto w = bound_term(n, lr, k);
      const double fd = (bound_term(n, lr, k + h).value - bound_term(n, lr, k - h).value) / (2 * h);
      CHECK(fd_agrees(w.d1, fd, w.value, h));
      CHECK(w.d1 > 0.0);
      CHECK(w.d2 >= 0.0);
    }
  }
}

TEST_CASE("objective Hessian is positive inside the box") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(1e-3, 1 - 1e-3);
  const EmbeddingProblem p = problem(4, 10.0, 128, 5.0);
  const double lr = p.log_ratio();
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> k(4);
    for (auto& x : k) x = u(gen) * lr;
    const SeparableEval e = objective_and_derivatives(k, p);
    for (double d : e.hessian_diag) {
      // Far in the tail the density underflows to zero.
      CHECK(d >= 0.0);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (k[i] < 0.5 * lr) CHECK(e.hessian_diag[i] > 0.0);
    }
  }
}

TEST_CASE("second differences of F and W are non-negative") {
  for (int n : {16, 128}) {
    for (double em : {1.0, 10.0}) {
      const double lr = std::log(make(4, em).ratio);
      const int m = 1000;
      const double h = lr / (m + 1);
      std::vector<double> f(m), w(m);
      for (int j = 0; j < m; ++j) {
        const double k = (j + 1) * h;
        f[j] = tag_error_term(n, k).value;
        w[j] = bound_term(n, lr, k).value;
      }
      for (int j = 1; j + 1 < m; ++j) {
        CHECK(f[j - 1] - 2 * f[j] + f[j + 1] >= -1e-9);
        CHECK(w[j - 1] - 2 * w[j] + w[j + 1] >= -1e-9);
      }
    }
  }
}

TEST_CASE("limits at the lower box edge") {
  const EmbeddingProblem p = problem(4, 10.0, 128, 3.0);
  const std::vector<double> k(4, 1e-12);
  const SeparableEval f = objective_and_derivatives(k, p);
  CHECK(f.value == doctest::Approx(0.5).epsilon(1e-6));
  const ConstraintEval c = constraint_functions(k, p);
  CHECK(c.power_slack == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(c.ser_bound.value == doctest::Approx(tag_free_bound(p)).epsilon(1e-9));
  CHECK(tag_error_term(128, 1e-12).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("box violations are rejected") {
  const EmbeddingProblem p = problem(2, 10.0, 128, 3.0);
  const double lr = p.log_ratio();
  CHECK_THROWS_AS(objective_and_derivatives(std::vector<double>{0.0, 0.1}, p), std::domain_error);
  CHECK_THROWS_AS(objective_and_derivatives(std::vector<double>{0.1, lr}, p), std::domain_error);
  CHECK_THROWS_AS(constraint_functions(std::vector<double>{-0.1, 0.1}, p), std::domain_error);
}

TEST_CASE("solver matches an exhaustive grid for L=2") {
  // Budgets where the grid's own resolution error is below 1e-6.
  for (auto [db, budget] : {std::pair{10.0, 4.0}, std::pair{3.0, 1.0}, std::pair{3.0, 2.0}}) {
    const EmbeddingProblem p = problem(2, std::pow(10.0, db / 10.0), 128, budget);
    const SolveResult r = solve_embedding(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.kkt_residual < 1e-6);
    CHECK(r.power_slack > -1e-9);
    CHECK(r.ser_bound_slack > -1e-9);

    const double lr = p.log_ratio();
    const int m = 10000;
    const double h = lr / m;
    std::vector<double> f(m), w(m), p0(m), p1(m);
    for (int j = 1; j < m; ++j) {
      const double k = j * h;
      f[j] = tag_error_term(128, k).value / 4;
      w[j] = bound_term(128, lr, k).value / 2;
      p0[j] = p.base.levels[0] * std::expm1(k) / 4;
      p1[j] = p.base.levels[1] * std::expm1(k) / 4;
    }
    double best = 1.0;
    for (int i = 1; i < m; ++i) {
      if (w[i] > p.delta) continue;
      for (int j = 1; j < m; ++j) {
        if (p0[i] + p1[j] > budget) continue;
        best = std::min(best, f[i] + f[j]);
      }
    }
    CAPTURE(db);
    CAPTURE(budget);
    CHECK(std::abs(best - r.objective) < 1e-6);
  }
}

TEST_CASE("more budget never hurts") {
  double prev = 1.0;
  for (double budget : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 1e3}) {
    const SolveResult r = solve_embedding(problem(4, 10.0, 128, budget));
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective <= prev + 1e-9);
    prev = r.objective;
  }
}

TEST_CASE("infeasible problems are detected") {
  // 0 dB cannot meet 1e-5 with N = 16 even without tags.
  const EmbeddingProblem p = problem(4, 1.0, 16, 1.0);
  CHECK(tag_free_bound(p) > p.delta);
  CHECK(solve_embedding(p).status == SolveStatus::infeasible);
  EmbeddingProblem zero = problem(4, 10.0, 128, 0.0);
  CHECK(solve_embedding(zero).status == SolveStatus::infeasible);
  CHECK(to_string(SolveStatus::max_iter) == "max_iter");
}

TEST_CASE("allocation at alpha = 1 leaves tags at guessing") {
  SystemConfig cfg;
  cfg.total_power = 10.0;
  const AllocationSample s = evaluate_allocation(cfg, 1.0, SolverOptions{});
  CHECK(s.tag_ser == 0.5);
  CHECK(s.feasible);
}

TEST_CASE("allocate_power shape and activity") {
  double prev = 1.0;
  for (double total : {10.0, 20.0}) {
    SystemConfig cfg;
    cfg.total_power = total;
    const AllocationResult a = allocate_power(cfg);
    CHECK(a.samples.size() >= 64);
    CHECK(a.alpha0 <= a.alpha_star);
    CHECK(a.alpha_star <= 1.0);
    for (double h : a.h_values()) {
      CHECK(h >= 0.0);
      CHECK(h <= 1.0);
    }
    CHECK(a.unimodal);
    CHECK(a.h_star < a.samples.front().tag_ser);
    CHECK(a.h_star < a.samples.back().tag_ser);
    CHECK(a.best.status == SolveStatus::optimal);
    CHECK(a.best.power_slack < 1e-6 * total);
    CHECK(a.h_star <= prev);
    prev = a.h_star;
  }
}

TEST_CASE("alpha0 and infeasible totals") {
  SystemConfig cfg;
  cfg.total_power = 10.0;
  const double a0 = find_alpha0(cfg);
  SystemConfig at = cfg;
  at.message_power = a0 * 10.0;
  EmbeddingProblem p;
  p.base = design_constellation(at);
  p.antennas = 128;
  CHECK(tag_free_bound(p) <= cfg.delta);
  at.message_power = (a0 - 2e-6) * 10.0;
  p.base = design_constellation(at);
  CHECK(tag_free_bound(p) > cfg.delta);

  cfg.total_power = 0.5;
  try {
    find_alpha0(cfg);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.best_achievable_bound() > cfg.delta);
  }
}

TEST_CASE("tradeoff curve is monotone") {
  SystemConfig cfg;
  cfg.total_power = 10.0;
  const std::vector<double> deltas{1e-3, 1e-6, 1e-4, 1e-5};
  AllocationOptions opts;
  opts.grid_points = 32;
  const auto lo = tradeoff_curve(cfg, deltas, opts);
  cfg.total_power = 15.0;
  const auto hi = tradeoff_curve(cfg, deltas, opts);
  REQUIRE(lo.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(lo[i].feasible);
    CHECK(hi[i].min_tag_ser <= lo[i].min_tag_ser);
    if (i > 0) {
      CHECK(lo[i].delta > lo[i - 1].delta);
      CHECK(lo[i].min_tag_ser <= lo[i - 1].min_tag_ser);
    }
  }
}

}  // TEST_SUITE
