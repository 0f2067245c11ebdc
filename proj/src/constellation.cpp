#include "pla/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pla/errors.hpp"
#include "pla/numerics.hpp"

namespace pla {

void SystemConfig::validate() const {
  if (antennas < 1) throw ConfigError("system.antennas", "must be >= 1");
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw ConfigError("system.noise_variance", "must be positive");
  }
  if (constellation_size < 2) {
    throw ConfigError("system.constellation_size", "must be >= 2");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("system.delta", "must lie in (0, 1]");
  }
  if (message_power && !(std::isfinite(*message_power) && *message_power > 0.0)) {
    throw ConfigError("system.message_power", "gamma_m must be positive");
  }
  if (total_power && !(std::isfinite(*total_power) && *total_power > 0.0)) {
    throw ConfigError("system.total_power", "must be positive");
  }
  if (message_power && total_power && *message_power > *total_power) {
    throw ConfigError("system.message_power", "must not exceed total_power");
  }
}

double SystemConfig::message_snr() const {
  if (!message_power) {
    throw ConfigError("system.message_power", "required but not set");
  }
  return *message_power / sigma2;
}

double MessageConstellation::average_power() const {
  if (powers.empty()) return 0.0;
  return std::accumulate(powers.begin(), powers.end(), 0.0) / powers.size();
}

double solve_ratio(int constellation_size, double message_snr) {
  if (constellation_size < 2) {
    throw std::invalid_argument("solve_ratio: constellation size must be >= 2");
  }
  if (!std::isfinite(message_snr) || message_snr <= 0.0) {
    throw std::invalid_argument("gamma_m must be positive");
  }
  const int n = constellation_size;
  const double target = n * (message_snr + 1.0);
  // Left side is convex and increasing on R > 0, and R^{L-1} <= target at the
  // root, so Newton started from target^{1/(L-1)} descends monotonically onto
  // the root from the right.
  double r = std::pow(target, 1.0 / (n - 1));
  for (int iter = 0; iter < 200; ++iter) {
    double f = -target;
    double df = 0.0;
    double pw = 1.0;
    for (int j = 0; j < n; ++j) {
      f += pw;
      if (j + 1 < n) df += (j + 1) * pw;
      pw *= r;
    }
    const double step = f / df;
    const double next = std::max(r - step, 1.0);
    if (std::abs(next - r) <= 1e-15 * r) {
      r = next;
      break;
    }
    r = next;
  }
  return r;
}

MessageConstellation design_constellation(const SystemConfig& cfg) {
  cfg.validate();
  const double gamma = cfg.message_snr();
  MessageConstellation c;
  c.sigma2 = cfg.sigma2;
  c.ratio = solve_ratio(cfg.constellation_size, gamma);
  const double log_r = std::log(c.ratio);
  const auto n = static_cast<std::size_t>(cfg.constellation_size);
  c.powers.resize(n);
  c.levels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.powers[i] = cfg.sigma2 * std::expm1(static_cast<double>(i) * log_r);
    c.levels[i] = cfg.sigma2 * std::exp(static_cast<double>(i) * log_r);
  }
  c.thresholds = message_thresholds(c.levels);
  return c;
}

double decision_threshold(double a, double b) {
  if (a == b) return a;
  const double d = (b - a) / a;
  return b * std::log1p(d) / d;
}

std::vector<double> message_thresholds(std::span<const double> levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) {
      throw std::invalid_argument("message_thresholds: levels must be positive");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw std::invalid_argument(
          "message_thresholds: levels must be strictly increasing (index " +
          std::to_string(i) + ")");
    }
  }
  std::vector<double> b;
  if (levels.size() < 2) return b;
  b.reserve(levels.size() - 1);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    b.push_back(decision_threshold(levels[i], levels[i + 1]));
  }
  return b;
}

std::size_t detect_message(double energy, std::span<const double> thresholds) {
  const std::size_t n = thresholds.size();
  if (n == 0 || energy < thresholds[0]) return 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (energy <= thresholds[i]) return i;
  }
  return n;
}

double message_ser_analytic(const MessageConstellation& c, int antennas) {
  const std::size_t n = c.size();
  const double nn = antennas;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) err += chi2_sf(antennas, nn * c.thresholds[i] / c.levels[i]);
    if (i > 0) err += chi2_cdf(antennas, nn * c.thresholds[i - 1] / c.levels[i]);
  }
  return err / static_cast<double>(n);
}

}  // namespace pla
