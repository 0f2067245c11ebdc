#pragma once

#include <cstdint>
#include <random>

namespace pla {

// Complex chi-squared law with N degrees of freedom: Z = sum of N unit-mean
// exponentials, i.e. Gamma(N, 1). The received energy ||y||^2 divided by
// (|x|^2 + sigma^2) follows this law.

/// G(z) = 1 - e^{-z} sum_{L<N} z^L / L!. Throws std::invalid_argument on
/// N < 1 or z negative / non-finite.
double chi2_cdf(int antennas, double z);

/// 1 - G(z), evaluated directly so that upper-tail values keep full relative
/// precision.
double chi2_sf(int antennas, double z);

/// Density f_Z(z) = z^{N-1} e^{-z} / (N-1)!.
double chi2_pdf(int antennas, double z);

/// Largest amount by which an intermediate G(z) left [0, 1] before clamping.
/// Only tracked in debug builds; always 0 with NDEBUG.
double chi2_max_clamp_violation();

/// Reproducible random stream keyed by (master_seed, stream_index).
///
/// The two keys are mixed through std::seed_seq into a 64-bit Mersenne
/// Twister, so per-block streams can be created independently by any worker.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

/// Draws ||y||^2 / N for y = h x + n without materializing the vectors:
/// (|x|^2 + sigma^2) * Gamma(N, 1) / N. Holds the gamma sampler so hot loops
/// avoid re-initialising it.
class EnergySampler {
 public:
  explicit EnergySampler(int antennas);

  /// mean_energy is |x|^2 + sigma^2.
  double operator()(double mean_energy, RngStream& rng);

  int antennas() const { return antennas_; }

 private:
  int antennas_;
  std::gamma_distribution<double> gamma_;
};

/// Direct chi-squared path (see EnergySampler).
double sample_received_energy(double signal_power, double sigma2, int antennas,
                              RngStream& rng);

/// Full-vector path: draws h ~ CN(0, I_N) and n ~ CN(0, sigma^2 I_N), forms
/// y = h sqrt(signal_power) + n and returns ||y||^2 / N.
double sample_received_energy_full(double signal_power, double sigma2,
                                   int antennas, RngStream& rng);

}  // namespace pla
