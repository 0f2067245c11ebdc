#include "pla/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pla/numerics.hpp"

namespace pla {
namespace {

void check_interleaving(const TagEmbedding& e) {
  const std::size_t n = e.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = e.a1[i] <= e.c[i] && e.c[i] <= e.a2[i];
    if (i + 1 < n) {
      ok = ok && e.a2[i] <= e.b_prime[i] && e.b_prime[i] <= e.a1[i + 1];
    }
    if (!ok) {
      throw std::logic_error("tag embedding thresholds not interleaved at symbol " +
                             std::to_string(i));
    }
  }
}

TagEmbedding assemble(const MessageConstellation& base, std::vector<double> k,
                      std::vector<double> a2) {
  TagEmbedding e;
  e.base = base;
  e.k = std::move(k);
  e.a1 = base.levels;
  e.a2 = std::move(a2);
  const std::size_t n = e.size();
  const double log_r = std::log(base.ratio);
  e.c.resize(n);
  e.symbol_valid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    e.c[i] = decision_threshold(e.a1[i], e.a2[i]);
    e.symbol_valid[i] = e.k[i] > 0.0 && e.k[i] < log_r;
  }
  e.b_prime.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    e.b_prime[i] = decision_threshold(e.a2[i], e.a1[i + 1]);
  }
  return e;
}

}  // namespace

bool TagEmbedding::all_valid() const {
  return std::all_of(symbol_valid.begin(), symbol_valid.end(),
                     [](bool v) { return v; });
}

TagEmbedding build_embedding(const MessageConstellation& base,
                             std::span<const double> k) {
  const std::size_t n = base.size();
  if (k.size() != n) {
    throw std::invalid_argument("build_embedding: expected " + std::to_string(n) +
                                " tag exponents, got " + std::to_string(k.size()));
  }
  const double log_r = std::log(base.ratio);
  std::vector<double> a2(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      std::ostringstream os;
      os << "k[" << i << "] = " << k[i] << " violates lower bound k > 0";
      throw std::invalid_argument(os.str());
    }
    if (!(k[i] < log_r)) {
      std::ostringstream os;
      os << "k[" << i << "] = " << k[i] << " violates upper bound k < ln R = "
         << log_r;
      throw std::invalid_argument(os.str());
    }
    a2[i] = base.levels[i] * std::exp(k[i]);
  }
  TagEmbedding e = assemble(base, std::vector<double>(k.begin(), k.end()),
                            std::move(a2));
  check_interleaving(e);
  return e;
}

TagEmbedding build_embedding_uniform_ratio(const MessageConstellation& base,
                                           double fraction) {
  std::vector<double> k(base.size(), fraction * std::log(base.ratio));
  return build_embedding(base, k);
}

TagEmbedding uniform_embedding(const MessageConstellation& base,
                               double tag_power_value) {
  if (!std::isfinite(tag_power_value) || tag_power_value < 0.0) {
    throw std::invalid_argument("uniform_embedding: tag power must be >= 0");
  }
  const std::size_t n = base.size();
  std::vector<double> k(n);
  std::vector<double> a2(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = std::log1p(tag_power_value / base.levels[i]);
    a2[i] = base.levels[i] + tag_power_value;
  }
  return assemble(base, std::move(k), std::move(a2));
}

double tag_power(const TagEmbedding& emb) {
  double sum = 0.0;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    sum += emb.a1[i] * std::expm1(emb.k[i]);
  }
  return sum / (2.0 * static_cast<double>(emb.size()));
}

double tag_power_from_amplitudes(const TagEmbedding& emb) {
  double sum = 0.0;
  for (std::size_t i = 0; i < emb.size(); ++i) sum += emb.a2[i] - emb.a1[i];
  return sum / (2.0 * static_cast<double>(emb.size()));
}

Detection detect(double energy, const TagEmbedding& emb) {
  Detection d;
  d.message = detect_message(energy, emb.b_prime);
  d.tag_bit = energy <= emb.c[d.message] ? 0 : 1;
  return d;
}

double threshold_over_high(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return 1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0 + x2 * x2 * x2 / 30240.0;
  }
  return x / std::expm1(x);
}

double threshold_over_low(double x) { return threshold_over_high(x) + x; }

double pairwise_error(int antennas, double log_ratio) {
  if (log_ratio == 0.0) return 1.0;
  const double nn = antennas;
  return chi2_cdf(antennas, nn * threshold_over_high(log_ratio)) +
         chi2_sf(antennas, nn * threshold_over_low(log_ratio));
}

double message_ser_embedded(const TagEmbedding& emb, int antennas) {
  const std::size_t n = emb.size();
  const double nn = antennas;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (double level : {emb.a1[i], emb.a2[i]}) {
      if (i + 1 < n) err += 0.5 * chi2_sf(antennas, nn * emb.b_prime[i] / level);
      if (i > 0) err += 0.5 * chi2_cdf(antennas, nn * emb.b_prime[i - 1] / level);
    }
  }
  return err / static_cast<double>(n);
}

double tag_ser_analytic(const TagEmbedding& emb, int antennas) {
  double sum = 0.0;
  for (double k : emb.k) sum += pairwise_error(antennas, k);
  return sum / (2.0 * static_cast<double>(emb.size()));
}

double message_ser_upper(const TagEmbedding& emb, int antennas) {
  const double log_r = std::log(emb.base.ratio);
  const std::size_t n = emb.size();
  double sum = 0.0;
  // h(r) = u(ln(R/r)) and g(r) = v(ln(R/r)).
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sum += pairwise_error(antennas, log_r - emb.k[i]);
  }
  return sum / static_cast<double>(n);
}

ErrorReport analyze(const TagEmbedding& emb, int antennas) {
  ErrorReport r;
  r.p_em = message_ser_embedded(emb, antennas);
  r.p_et = tag_ser_analytic(emb, antennas);
  r.p_em_upper = message_ser_upper(emb, antennas);
  return r;
}

}  // namespace pla
