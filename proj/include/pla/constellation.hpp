#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pla {

/// Link and system parameters. Defaults follow the reference operating point
/// (N = 128, sigma^2 = 1, L_m = 4, delta = 1e-5).
struct SystemConfig {
  int antennas = 128;
  double sigma2 = 1.0;
  int constellation_size = 4;
  std::optional<double> total_power;    // E_tot
  std::optional<double> message_power;  // E_m
  double delta = 1e-5;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// gamma_m = E_m / sigma^2. Requires message_power.
  double message_snr() const;
};

/// Energy-domain non-negative PAM constellation.
///
/// Index i runs 0..L-1 (lowest power first). `levels[i]` = A_i = |m_i|^2 +
/// sigma^2 = sigma^2 R^i and `thresholds[i]` separates levels i and i+1.
struct MessageConstellation {
  std::vector<double> powers;      // |m_i|^2, powers[0] == 0
  std::vector<double> levels;      // A_i
  std::vector<double> thresholds;  // B_i, size L-1
  double ratio = 0.0;              // R
  double sigma2 = 1.0;

  std::size_t size() const { return powers.size(); }
  double average_power() const;
};

/// Unique R > 1 with sum_{j<L} R^j = L (gamma_m + 1).
double solve_ratio(int constellation_size, double message_snr);

MessageConstellation design_constellation(const SystemConfig& cfg);

/// ML boundary between two zero-mean complex Gaussian hypotheses with
/// per-entry variances a and b, in units of ||y||^2 / N:
/// a b ln(b/a) / (b - a). Symmetric in (a, b); returns a when a == b.
double decision_threshold(double a, double b);

/// B_i for a strictly increasing, positive list of levels.
std::vector<double> message_thresholds(std::span<const double> levels);

/// Quantization detector on ||y||^2 / N. Returns a 0-based index.
///
/// Cell 0 is energy < B_0; cell i (1 <= i < L-1) is B_{i-1} <= energy <= B_i;
/// the last cell is everything above. An energy equal to a threshold goes to
/// the lowest cell whose closed range contains it, so energy == B_0 lands in
/// cell 1.
std::size_t detect_message(double energy, std::span<const double> thresholds);

/// Average message SER of the tag-free constellation with equiprobable
/// symbols.
double message_ser_analytic(const MessageConstellation& c, int antennas);

}  // namespace pla
