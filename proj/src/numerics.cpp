#include "pla/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pla {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_args(int antennas, double z) {
  if (antennas < 1) {
    throw std::invalid_argument("chi2: antenna count must be >= 1, got " +
                                std::to_string(antennas));
  }
  if (!std::isfinite(z) || z < 0.0) {
    throw std::invalid_argument("chi2: argument must be finite and >= 0");
  }
}

#ifndef NDEBUG
std::atomic<double> g_max_violation{0.0};

void note_violation(double v) {
  double seen = g_max_violation.load(std::memory_order_relaxed);
  while (v > seen &&
         !g_max_violation.compare_exchange_weak(seen, v,
                                                std::memory_order_relaxed)) {
  }
}
#endif

double clamp_unit(double p) {
#ifndef NDEBUG
  if (p < 0.0) note_violation(-p);
  if (p > 1.0) note_violation(p - 1.0);
#endif
  return std::clamp(p, 0.0, 1.0);
}

// Both tails come from the Poisson terms t_L = e^{-z} z^L / L!, linked by
// t_{L+1} = t_L z / (L+1). Each tail is summed starting at its largest term
// (t_N for the lower tail when z < N, t_{N-1} for the upper tail otherwise) so
// that the ratio between successive terms stays below one and the leading
// term is formed once in log space.

// Lower tail P(N, z) = sum_{L>=N} t_L, valid for z < N.
double lower_tail(int n, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 100000; ++j) {
    term *= z / (n + j);
    sum += term;
    if (term <= sum * kEps) break;
  }
  const double log_lead = n * std::log(z) - z - std::lgamma(n + 1.0);
  return std::exp(log_lead + std::log(sum));
}

// Upper tail Q(N, z) = sum_{L<N} t_L, valid for z >= N.
double upper_tail(int n, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int l = n - 1; l >= 1; --l) {
    term *= l / z;
    sum += term;
    if (term <= sum * kEps) break;
  }
  const double log_lead = (n - 1) * std::log(z) - z - std::lgamma(n);
  return std::exp(log_lead + std::log(sum));
}

}  // namespace

double chi2_cdf(int antennas, double z) {
  check_args(antennas, z);
  if (z == 0.0) return 0.0;
  if (z < antennas) return clamp_unit(lower_tail(antennas, z));
  return clamp_unit(1.0 - upper_tail(antennas, z));
}

double chi2_sf(int antennas, double z) {
  check_args(antennas, z);
  if (z == 0.0) return 1.0;
  if (z < antennas) return clamp_unit(1.0 - lower_tail(antennas, z));
  return clamp_unit(upper_tail(antennas, z));
}

double chi2_pdf(int antennas, double z) {
  check_args(antennas, z);
  if (z == 0.0) return antennas == 1 ? 1.0 : 0.0;
  return std::exp((antennas - 1) * std::log(z) - z - std::lgamma(antennas));
}

double chi2_max_clamp_violation() {
#ifndef NDEBUG
  return g_max_violation.load();
#else
  return 0.0;
#endif
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

EnergySampler::EnergySampler(int antennas)
    : antennas_(antennas), gamma_(static_cast<double>(antennas), 1.0) {
  if (antennas < 1) {
    throw std::invalid_argument("EnergySampler: antenna count must be >= 1");
  }
}

double EnergySampler::operator()(double mean_energy, RngStream& rng) {
  return mean_energy * gamma_(rng) / antennas_;
}

namespace {
void check_sampler_args(double signal_power, double sigma2, int antennas) {
  if (!std::isfinite(signal_power) || signal_power < 0.0) {
    throw std::invalid_argument("signal power must be finite and >= 0");
  }
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw std::invalid_argument("noise variance must be finite and > 0");
  }
  if (antennas < 1) {
    throw std::invalid_argument("antenna count must be >= 1");
  }
}
}  // namespace

double sample_received_energy(double signal_power, double sigma2, int antennas,
                              RngStream& rng) {
  check_sampler_args(signal_power, sigma2, antennas);
  EnergySampler sampler(antennas);
  return sampler(signal_power + sigma2, rng);
}

double sample_received_energy_full(double signal_power, double sigma2,
                                   int antennas, RngStream& rng) {
  check_sampler_args(signal_power, sigma2, antennas);
  // CN(0, v): real and imaginary parts each N(0, v/2).
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  const double amplitude = std::sqrt(signal_power);
  const double noise_scale = std::sqrt(sigma2);
  double energy = 0.0;
  for (int a = 0; a < antennas; ++a) {
    const double h_re = unit(rng);
    const double h_im = unit(rng);
    const double n_re = noise_scale * unit(rng);
    const double n_im = noise_scale * unit(rng);
    const double y_re = h_re * amplitude + n_re;
    const double y_im = h_im * amplitude + n_im;
    energy += y_re * y_re + y_im * y_im;
  }
  return energy / antennas;
}

}  // namespace pla
