#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pla/simulate.hpp"

using namespace pla;

namespace {

TagEmbedding reference_embedding() {
  SweepOptions opts;
  return sweep_embedding(opts, 10.0);
}

std::vector<std::uint8_t> test_key() {
  std::vector<std::uint8_t> key(16);
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(i);
  return key;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("Wilson interval") {
  const SerEstimate e = make_estimate(10, 1000);
  CHECK(e.rate == doctest::Approx(0.01));
  CHECK(e.lo < e.rate);
  CHECK(e.rate < e.hi);
  // Reference values from the closed form.
  CHECK(e.lo == doctest::Approx(0.0054401).epsilon(1e-4));
  CHECK(e.hi == doctest::Approx(0.0182997).epsilon(1e-4));
  const SerEstimate zero = make_estimate(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(0.0369935).epsilon(1e-4));
  const SerEstimate all = make_estimate(100, 100);
  CHECK(all.hi == 1.0);
  const SerEstimate none = make_estimate(0, 0);
  CHECK(none.lo == 0.0);
  CHECK(none.hi == 1.0);
}

TEST_CASE("counts do not depend on the worker count") {
  const TagEmbedding emb = reference_embedding();
  SimConfig cfg;
  cfg.trials = 300'001;
  cfg.master_seed = 99;
  cfg.workers = 1;
  const SerTriple one = simulate_ser(emb, cfg);
  for (int w : {2, 3, 8}) {
    cfg.workers = w;
    const SerTriple many = simulate_ser(emb, cfg);
    CHECK(many.message.errors == one.message.errors);
    CHECK(many.tag_conditional.errors == one.tag_conditional.errors);
    CHECK(many.tag_conditional.trials == one.tag_conditional.trials);
    CHECK(many.tag_unconditional.errors == one.tag_unconditional.errors);
  }
  CHECK(one.message.trials == 300'001);
  cfg.master_seed = 100;
  const SerTriple other = simulate_ser(emb, cfg);
  CHECK(other.tag_unconditional.errors != one.tag_unconditional.errors);
}

TEST_CASE("huge SNR gives no message errors") {
  SystemConfig s;
  s.message_power = 1e5;
  const auto base = design_constellation(s);
  const auto emb = build_embedding_uniform_ratio(base, 0.5);
  SimConfig cfg;
  cfg.trials = 1'000'000;
  const SerTriple r = simulate_ser(emb, cfg);
  CHECK(r.message.errors == 0);
}

TEST_CASE("full-vector path agrees with the direct path") {
  SystemConfig s;
  s.constellation_size = 2;
  s.message_power = 3.0;
  const auto emb = build_embedding_uniform_ratio(design_constellation(s), 0.4);
  SimConfig cfg;
  cfg.trials = 200'000;
  cfg.antennas = 8;
  cfg.full_vector = true;
  const SerTriple full = simulate_ser(emb, cfg);
  cfg.full_vector = false;
  cfg.master_seed = 7;
  const SerTriple direct = simulate_ser(emb, cfg);
  auto close = [&](const SerEstimate& a, const SerEstimate& b) {
    const double p = 0.5 * (a.rate + b.rate);
    return std::abs(a.rate - b.rate) < 4 * std::sqrt(2 * p * (1 - p) / cfg.trials);
  };
  CHECK(close(full.message, direct.message));
  CHECK(close(full.tag_unconditional, direct.tag_unconditional));
  CHECK(std::abs(direct.message.rate - message_ser_embedded(emb, 8)) <
        4 * std::sqrt(direct.message.rate / cfg.trials));
}

TEST_CASE("Gray labels round-trip") {
  for (int bps : {1, 2, 3, 4}) {
    for (std::size_t i = 0; i < (std::size_t{1} << bps); ++i) {
      const auto bits = symbol_bits(i, bps);
      CHECK(symbol_index(bits.data(), bps) == i);
      if (i > 0) {
        const auto prev = symbol_bits(i - 1, bps);
        int diff = 0;
        for (int b = 0; b < bps; ++b) diff += bits[b] != prev[b];
        CHECK(diff == 1);
      }
    }
  }
}

TEST_CASE("keyed hash") {
  const auto key = test_key();
  const std::vector<std::uint8_t> msg{1, 0, 1, 1, 0, 0, 1, 0};
  const auto h = keyed_hash_bits(msg, key, 600);
  CHECK(h.size() == 600);
  CHECK(h == keyed_hash_bits(msg, key, 600));
  auto flipped = msg;
  flipped[3] ^= 1;
  const auto h2 = keyed_hash_bits(flipped, key, 256);
  int diff = 0;
  for (int i = 0; i < 256; ++i) diff += h[i] != h2[i];
  CHECK(diff > 80);
  CHECK(diff < 176);
  auto other_key = key;
  other_key[0] ^= 1;
  CHECK(keyed_hash_bits(msg, other_key, 64) != std::vector<std::uint8_t>(h.begin(), h.begin() + 64));
  // Prefix property: shorter outputs are prefixes of longer ones.
  CHECK(keyed_hash_bits(msg, key, 10) == std::vector<std::uint8_t>(h.begin(), h.begin() + 10));
}

TEST_CASE("packet construction") {
  const TagEmbedding emb = reference_embedding();
  const auto key = test_key();
  std::vector<std::uint8_t> bits{0, 0, 0, 1, 1, 1, 1, 0};
  const AuthPacket pkt = make_packet(bits, key, emb);
  REQUIRE(pkt.symbols.size() == 4);
  CHECK(pkt.message_indices == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(pkt.tag_bits == keyed_hash_bits(bits, key, 4));
  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t m = pkt.message_indices[s];
    const double mean = pkt.tag_bits[s] ? emb.a2[m] : emb.a1[m];
    CHECK(pkt.symbols[s] * pkt.symbols[s] + 1.0 == doctest::Approx(mean).epsilon(1e-12));
  }
  bits.pop_back();
  CHECK_THROWS_AS(make_packet(bits, key, emb), std::invalid_argument);
}

TEST_CASE("noiseless round trip is accepted") {
  const TagEmbedding emb = reference_embedding();
  const auto key = test_key();
  RngStream rng(1, 1);
  AuthChannel ch;
  ch.noiseless = true;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::uint8_t> bits(64);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
    const AuthPacket pkt = make_packet(bits, key, emb);
    CHECK(authenticate_roundtrip(pkt, emb, ch, rng) == AuthOutcome::accepted);
    AuthPacket bad = pkt;
    bad.tag_bits[5] ^= 1;
    const std::size_t m = bad.message_indices[5];
    bad.symbols[5] = std::sqrt((bad.tag_bits[5] ? emb.a2[m] : emb.a1[m]) - 1.0);
    CHECK(authenticate_roundtrip(bad, emb, ch, rng) == AuthOutcome::tag_mismatch);
  }
  CHECK(to_string(AuthOutcome::message_corrupted) == "message_corrupted");
}

TEST_CASE("trial runners are reproducible") {
  const TagEmbedding emb = reference_embedding();
  AuthTrialConfig cfg;
  cfg.packets = 3000;
  cfg.key = test_key();
  const AuthTrialSummary a = run_legitimate_trials(emb, cfg);
  cfg.workers = 3;
  const AuthTrialSummary b = run_legitimate_trials(emb, cfg);
  CHECK(a.accepted == b.accepted);
  CHECK(a.tag_mismatch == b.tag_mismatch);
  CHECK(a.accepted + a.tag_mismatch + a.message_corrupted == 3000);
  cfg.symbols_per_packet = 4;
  cfg.packets = 20000;
  const AuthTrialSummary f = run_forgery_trials(emb, cfg);
  const double p = 1.0 / 16;
  CHECK(std::abs(f.acceptance.rate - p) < 4 * std::sqrt(p * (1 - p) / 20000));
}

}  // TEST_SUITE
