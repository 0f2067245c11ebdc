#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "pla/constellation.hpp"
#include "pla/errors.hpp"
#include "pla/numerics.hpp"

using namespace pla;

namespace {

MessageConstellation make(int size, double message_power, double sigma2 = 1.0) {
  SystemConfig s;
  s.constellation_size = size;
  s.message_power = message_power;
  s.sigma2 = sigma2;
  return design_constellation(s);
}

// Index minimizing the negative log-likelihood N ln A + N e / A; first wins
// on ties.
std::size_t likelihood_argmax(double energy, const std::vector<double>& levels) {
  std::size_t best = 0;
  double best_cost = std::log(levels[0]) + energy / levels[0];
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double cost = std::log(levels[i]) + energy / levels[i];
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("constellation") {

TEST_CASE("solve_ratio closed forms") {
  for (double g : {0.1, 0.5, 1.0, 3.7, 10.0, 1e3}) {
    CHECK(solve_ratio(2, g) == doctest::Approx(2 * g + 1).epsilon(1e-13));
  }
  CHECK(solve_ratio(2, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_ratio residual") {
  for (int l : {4, 8, 16}) {
    for (double g : {0.01, 1.0, 10.0, 100.0}) {
      const double r = solve_ratio(l, g);
      double sum = 0.0;
      for (int j = 0; j < l; ++j) sum += std::pow(r, j);
      CAPTURE(l);
      CAPTURE(g);
      CHECK(r > 1.0);
      CHECK(std::abs(sum - l * (g + 1)) < 1e-10 * l * (g + 1));
    }
  }
  const double r = solve_ratio(4, 10.0);
  CHECK(std::abs(1 + r + r * r + r * r * r - 44.0) < 1e-10);
}

TEST_CASE("solve_ratio rejects non-positive SNR") {
  CHECK_THROWS_WITH_AS(solve_ratio(4, 0.0), "gamma_m must be positive", std::invalid_argument);
  CHECK_THROWS_AS(solve_ratio(4, -1.0), std::invalid_argument);
  SystemConfig s;
  s.message_power = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("design_constellation structure") {
  const auto c2 = make(2, 1.0);
  REQUIRE(c2.size() == 2);
  CHECK(c2.powers[0] == 0.0);
  CHECK(c2.powers[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(c2.ratio == doctest::Approx(3.0).epsilon(1e-14));

  for (int l : {4, 8, 16}) {
    for (double sigma2 : {0.5, 1.0, 2.0}) {
      const auto c = make(l, 10.0, sigma2);
      CHECK(c.powers[0] == 0.0);
      CHECK(std::abs(c.average_power() - 10.0) < 1e-9 * 10.0);
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        CHECK(std::abs(c.levels[i + 1] / c.levels[i] - c.ratio) < 1e-10 * c.ratio);
        CHECK(c.levels[i] < c.thresholds[i]);
        CHECK(c.thresholds[i] < c.levels[i + 1]);
      }
      CHECK(c.levels[0] == sigma2);
    }
  }
}

TEST_CASE("message_thresholds values") {
  const double e = std::exp(1.0);
  CHECK(message_thresholds(std::vector<double>{1.0, e})[0] ==
        doctest::Approx(e / (e - 1.0)).epsilon(1e-14));
  CHECK(message_thresholds(std::vector<double>{1.0, 4.0})[0] ==
        doctest::Approx(4.0 * std::log(4.0) / 3.0).epsilon(1e-14));
  for (double eps : {1e-3, 1e-6, 1e-9, 1e-12}) {
    const double b = message_thresholds(std::vector<double>{2.0, 2.0 * (1 + eps)})[0];
    CHECK(std::abs(b - 2.0) < 2.0 * eps);
    CHECK(b >= 2.0);
  }
  CHECK(decision_threshold(3.0, 7.0) == doctest::Approx(decision_threshold(7.0, 3.0)));
}

TEST_CASE("message_thresholds rejects bad levels") {
  CHECK_THROWS_AS(message_thresholds(std::vector<double>{1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(message_thresholds(std::vector<double>{2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(message_thresholds(std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("detect_message cells and ties") {
  const auto c = make(4, 10.0);
  CHECK(detect_message(0.0, c.thresholds) == 0);
  CHECK(detect_message(c.thresholds[0], c.thresholds) == 1);
  CHECK(detect_message(std::nextafter(c.thresholds[0], 0.0), c.thresholds) == 0);
  CHECK(detect_message(c.thresholds[1], c.thresholds) == 1);
  CHECK(detect_message(std::nextafter(c.thresholds[1], 1e9), c.thresholds) == 2);
  CHECK(detect_message(c.thresholds[2], c.thresholds) == 2);
  CHECK(detect_message(1e6, c.thresholds) == 3);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(detect_message(c.levels[i], c.thresholds) == i);
}

TEST_CASE("detect_message equals the likelihood argmax") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int l : {2, 4, 8}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto c = make(l, 0.1 + 50.0 * u(gen), 0.2 + 2.0 * u(gen));
      for (int t = 0; t < 2000; ++t) {
        const double e = u(gen) * 1.3 * c.levels.back();
        CHECK_EQ(detect_message(e, c.thresholds), likelihood_argmax(e, c.levels));
        ++checked;
      }
    }
  }
  CHECK(checked == 120000);
}

TEST_CASE("message_ser_analytic") {
  CHECK(message_ser_analytic(make(4, 10.0), 128) < 1e-5);
  double prev = 1.0;
  for (int n : {16, 32, 64, 128}) {
    const double p = message_ser_analytic(make(4, 10.0), n);
    CHECK(p < prev);
    prev = p;
  }
  double prev2 = 1.0;
  for (int n : {1, 2, 4, 8, 32, 128, 512}) {
    const double p = message_ser_analytic(make(2, 2.0), n);
    CHECK(p < prev2);
    prev2 = p;
  }
}

TEST_CASE("message_ser_analytic against Monte Carlo") {
  const auto c = make(2, 1.0);
  const int n = 8;
  const std::uint64_t trials = 10'000'000;
  RngStream rng(2024, 0);
  EnergySampler sampler(n);
  std::uniform_int_distribution<int> pick(0, 1);
  std::uint64_t errors = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const int i = pick(rng);
    if (detect_message(sampler(c.levels[i], rng), c.thresholds) != static_cast<std::size_t>(i)) ++errors;
  }
  const double p = message_ser_analytic(c, n);
  const double sd = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(errors) / trials - p) < 3 * sd);
}

TEST_CASE("SystemConfig validation names fields") {
  SystemConfig s;
  s.delta = 1.5;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("system.delta"));
  s.delta = 0.0;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("system.delta"));
  s.delta = 1.0;
  CHECK_NOTHROW(s.validate());
  s.delta = 1e-5;
  s.total_power = 5.0;
  s.message_power = 6.0;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("system.message_power"));
  s.message_power = 4.0;
  CHECK_NOTHROW(s.validate());
  s.antennas = 0;
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("system.antennas"));
}

}  // TEST_SUITE
