#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pla/embedding.hpp"
#include "pla/estimate.hpp"
#include "pla/numerics.hpp"

namespace pla {

/// Monte Carlo settings. Trials are cut into fixed blocks of kSimBlock and
/// block b always draws from RngStream(master_seed, stream_base + b), so the
/// counts do not depend on `workers`.
struct SimConfig {
  std::uint64_t trials = 10'000'000;
  std::uint64_t master_seed = 1;
  int workers = 1;
  int antennas = 128;
  double sigma2 = 1.0;
  bool full_vector = false;
  std::uint64_t stream_base = 0;
};

inline constexpr std::uint64_t kSimBlock = 1u << 16;

struct SerTriple {
  SerEstimate message;
  SerEstimate tag_conditional;    // tag errors among message-correct trials
  SerEstimate tag_unconditional;  // tag errors among all trials
};

/// Equiprobable message index and tag bit per trial, energy drawn for
/// A_{i,j}, decided by detect().
SerTriple simulate_ser(const TagEmbedding& emb, const SimConfig& cfg);

/// Runs work(b) for every b in [0, blocks) on up to `workers` threads.
/// Blocks are handed out dynamically; callers store results per block.
void run_blocks(std::uint64_t blocks, int workers,
                const std::function<void(std::uint64_t)>& work);

// ---------------------------------------------------------------------------
// Authentication pipeline

/// HMAC-SHA256 of the packed bit string, expanded with a 32-bit block counter
/// when more than 256 output bits are requested. Returns `n_bits` bits, one
/// per byte (values 0 or 1).
std::vector<std::uint8_t> keyed_hash_bits(const std::vector<std::uint8_t>& bits,
                                          const std::vector<std::uint8_t>& key,
                                          std::size_t n_bits);

/// Name of the keyed hash, recorded in run metadata.
inline constexpr const char* kKeyedHashName = "HMAC-SHA256/counter";

/// Gray-coded bit label of symbol index i (log2 L bits, MSB first).
std::vector<std::uint8_t> symbol_bits(std::size_t index, int bits_per_symbol);
std::size_t symbol_index(const std::uint8_t* bits, int bits_per_symbol);

struct AuthPacket {
  std::vector<std::uint8_t> message_bits;
  std::vector<std::uint8_t> key;
  std::vector<std::uint8_t> tag_bits;          // one per symbol
  std::vector<std::size_t> message_indices;    // one per symbol
  std::vector<double> symbols;                 // transmitted amplitude x
};

/// Maps message bits onto symbols (L_m must be a power of two) and derives
/// the tag from the keyed hash. The message length must be a multiple of
/// log2 L_m.
AuthPacket make_packet(const std::vector<std::uint8_t>& message_bits,
                       const std::vector<std::uint8_t>& key,
                       const TagEmbedding& emb);

enum class AuthOutcome { accepted, message_corrupted, tag_mismatch };

std::string to_string(AuthOutcome o);

struct AuthChannel {
  int antennas = 128;
  double sigma2 = 1.0;
  /// Energies set to their means A_{i,j}: exact detection.
  bool noiseless = false;
};

/// Sends every symbol of `packet` through the channel, detects message and
/// tag per symbol and accepts iff the received tag equals the keyed hash of
/// the received message. A rejection is reported as message_corrupted when
/// the detected message differs from the sent one, else tag_mismatch.
AuthOutcome authenticate_roundtrip(const AuthPacket& packet,
                                   const TagEmbedding& emb,
                                   const AuthChannel& channel, RngStream& rng);

struct AuthTrialConfig {
  std::uint64_t packets = 100'000;
  int symbols_per_packet = 32;
  std::uint64_t master_seed = 1;
  int workers = 1;
  AuthChannel channel;
  std::vector<std::uint8_t> key;
};

struct AuthTrialSummary {
  std::uint64_t packets = 0;
  std::uint64_t accepted = 0;
  std::uint64_t message_corrupted = 0;
  std::uint64_t tag_mismatch = 0;
  SerEstimate acceptance;
};

/// Random messages, keyed tags.
AuthTrialSummary run_legitimate_trials(const TagEmbedding& emb,
                                       const AuthTrialConfig& cfg);

/// Random messages with uniformly random tag bits chosen without the key.
AuthTrialSummary run_forgery_trials(const TagEmbedding& emb,
                                    const AuthTrialConfig& cfg);

// ---------------------------------------------------------------------------
// SNR sweep with the uniform-power baseline

struct SweepOptions {
  int antennas = 128;
  double sigma2 = 1.0;
  int constellation_size = 4;
  double delta = 1e-5;
  std::vector<double> snr_db{6, 7, 8, 9, 10, 11, 12};
  /// Tag budget of the proposed scheme; unset means the power constraint is
  /// never binding.
  std::optional<double> tag_budget;
  /// SNR at which the uniform tag power is fixed.
  double reference_snr_db = 10.0;
  SimConfig sim;
};

struct SweepRow {
  double snr_db = 0.0;
  double message_snr = 0.0;
  std::vector<double> k;
  double p_em = 0.0;
  double p_et = 0.0;
  double p_em_upper = 0.0;
  SerTriple empirical;
  double uniform_tag_power = 0.0;
  bool uniform_valid = false;
  double uniform_p_em = 0.0;
  double uniform_p_et = 0.0;
  std::optional<SerTriple> uniform_empirical;
};

/// Constellation and optimized embedding used by the sweep at one SNR.
MessageConstellation sweep_constellation(const SweepOptions& opts, double snr_db);
TagEmbedding sweep_embedding(const SweepOptions& opts, double snr_db);

/// Uniform tag power whose analytic message SER equals `target_p_em`,
/// by bisection over tag powers that keep every symbol valid.
double match_uniform_power(const MessageConstellation& base, int antennas,
                           double target_p_em);

/// Per SNR: optimized embedding at `delta`, its analytic and simulated error
/// rates, and the uniform baseline with the tag power fixed at the reference
/// SNR. Row r simulates the proposed scheme with stream_base (2r) << 40 and
/// the baseline with (2r + 1) << 40.
std::vector<SweepRow> reproduce_snr_sweep(const SweepOptions& opts);

}  // namespace pla
