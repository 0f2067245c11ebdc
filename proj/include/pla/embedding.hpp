#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pla/constellation.hpp"
#include "pla/estimate.hpp"

namespace pla {

/// One-bit tag carried as extra power on top of each message level.
///
/// Tag bit 0 adds no power (A1[i] = A_i); tag bit 1 multiplies the level by
/// r_i = e^{k_i} (A2[i] = r_i A_i). `c[i]` separates the two tag hypotheses
/// of symbol i; `b_prime[i]` separates A2[i] from A1[i+1].
struct TagEmbedding {
  MessageConstellation base;
  std::vector<double> k;
  std::vector<double> a1;
  std::vector<double> a2;
  std::vector<double> b_prime;
  std::vector<double> c;
  /// false where a symbol violates 0 < k_i < ln R (only possible for the
  /// uniform baseline).
  std::vector<bool> symbol_valid;

  std::size_t size() const { return k.size(); }
  bool all_valid() const;
};

/// Validated construction. Throws std::invalid_argument naming the first k_i
/// outside (0, ln R).
TagEmbedding build_embedding(const MessageConstellation& base,
                             std::span<const double> k);

/// Convenience: k_i = fraction * ln R for every symbol.
TagEmbedding build_embedding_uniform_ratio(const MessageConstellation& base,
                                           double fraction);

/// Baseline with the same absolute tag power on every symbol:
/// |t_{i,2}|^2 = tag_power, so r_i = 1 + tag_power / A_i. Symbols whose r_i
/// leaves (1, R) are flagged in `symbol_valid` rather than rejected.
TagEmbedding uniform_embedding(const MessageConstellation& base,
                               double tag_power);

/// Average tag power in the budget form (1 / 2L) sum_i A_i (e^{k_i} - 1).
double tag_power(const TagEmbedding& emb);

/// Average tag power from the tag amplitudes themselves,
/// (1 / 2L) sum_i |t_{i,2}|^2 with |t_{i,2}|^2 = A2[i] - A1[i].
double tag_power_from_amplitudes(const TagEmbedding& emb);

struct Detection {
  std::size_t message = 0;
  int tag_bit = 0;
};

/// Two-step detector: quantize against B' (same tie rule as
/// detect_message), then tag bit 0 iff energy <= C_i.
Detection detect(double energy, const TagEmbedding& emb);

/// Ratios u(x) = x / (e^x - 1) and v(x) = x e^x / (e^x - 1). For two
/// hypotheses with variances A and e^x A, the ML threshold equals v(x) A =
/// u(x) e^x A.
double threshold_over_low(double log_ratio);   // v
double threshold_over_high(double log_ratio);  // u

/// Sum of both conditional error probabilities of the ML energy test between
/// variances A and e^x A over N antennas: G(N u(x)) + 1 - G(N v(x)).
/// Tends to 1 as x -> 0.
double pairwise_error(int antennas, double log_ratio);

/// Message SER with tags, averaging both tag bits per symbol.
double message_ser_embedded(const TagEmbedding& emb, int antennas);

/// Tag SER given a correctly detected message:
/// (1 / 2L) sum_i [1 + G(N u(r_i)) - G(N v(r_i))].
double tag_ser_analytic(const TagEmbedding& emb, int antennas);

/// Upper bound on the message SER:
/// (1 / L) sum_{i < L-1} [1 - G(N g(r_i)) + G(N h(r_i))] with
/// g(r) = R ln(R/r) / (R - r) and h(r) = r ln(R/r) / (R - r).
double message_ser_upper(const TagEmbedding& emb, int antennas);

struct ErrorReport {
  double p_em = 0.0;
  double p_et = 0.0;
  double p_em_upper = 0.0;
  std::optional<SerEstimate> empirical_p_em;
  std::optional<SerEstimate> empirical_p_et;
};

ErrorReport analyze(const TagEmbedding& emb, int antennas);

}  // namespace pla
