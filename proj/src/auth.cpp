#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <random>
#include <stdexcept>

#include "pla/simulate.hpp"

namespace pla {
namespace {

int bits_per_symbol(std::size_t constellation_size) {
  int b = 0;
  while ((std::size_t{1} << b) < constellation_size) ++b;
  if ((std::size_t{1} << b) != constellation_size || b == 0) {
    throw std::invalid_argument("constellation size must be a power of two >= 2");
  }
  return b;
}

std::vector<std::uint8_t> pack(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

double received_energy(double mean, const AuthChannel& ch,
                       EnergySampler& sampler, RngStream& rng) {
  return ch.noiseless ? mean : sampler(mean, rng);
}

std::vector<std::uint8_t> random_bits(std::size_t n, RngStream& rng) {
  std::vector<std::uint8_t> out(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng();
    out[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return out;
}

// HMAC context keyed once per thread and key; each message works on a copy.
class KeyedMac {
 public:
  static KeyedMac& for_key(const std::vector<std::uint8_t>& key) {
    thread_local KeyedMac mac;
    if (!mac.base_ || mac.key_ != key) mac.rekey(key);
    return mac;
  }

  KeyedMac() = default;
  KeyedMac(const KeyedMac&) = delete;
  KeyedMac& operator=(const KeyedMac&) = delete;
  ~KeyedMac() {
    EVP_MAC_CTX_free(base_);
    EVP_MAC_free(mac_);
  }

  std::size_t digest(const std::vector<std::uint8_t>& input, unsigned char* out) {
    EVP_MAC_CTX* ctx = EVP_MAC_CTX_dup(base_);
    std::size_t len = 0;
    const bool ok = ctx && EVP_MAC_update(ctx, input.data(), input.size()) &&
                    EVP_MAC_final(ctx, out, &len, EVP_MAX_MD_SIZE);
    EVP_MAC_CTX_free(ctx);
    if (!ok) throw std::runtime_error("HMAC-SHA256 failed");
    return len;
  }

 private:
  void rekey(const std::vector<std::uint8_t>& key) {
    if (!mac_) mac_ = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    EVP_MAC_CTX_free(base_);
    base_ = mac_ ? EVP_MAC_CTX_new(mac_) : nullptr;
    char digest_name[] = "SHA256";
    const OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
        OSSL_PARAM_construct_end()};
    // An empty key is passed as a one-byte buffer of length zero.
    static const unsigned char none = 0;
    if (!base_ || !EVP_MAC_init(base_, key.empty() ? &none : key.data(), key.size(), params)) {
      EVP_MAC_CTX_free(base_);
      base_ = nullptr;
      throw std::runtime_error("HMAC-SHA256 unavailable");
    }
    key_ = key;
  }

  EVP_MAC* mac_ = nullptr;
  EVP_MAC_CTX* base_ = nullptr;
  std::vector<std::uint8_t> key_;
};

// Stream namespaces keep packet trials apart from the SER blocks.
constexpr std::uint64_t kLegitStreams = std::uint64_t{1} << 62;
constexpr std::uint64_t kForgeryStreams = std::uint64_t{2} << 62;
constexpr std::uint64_t kPacketBlock = 1024;

AuthTrialSummary run_trials(const TagEmbedding& emb, const AuthTrialConfig& cfg,
                            bool forge, std::uint64_t stream_ns) {
  if (cfg.symbols_per_packet < 1) {
    throw std::invalid_argument("symbols_per_packet must be >= 1");
  }
  const int bps = bits_per_symbol(emb.size());
  const std::size_t n_bits =
      static_cast<std::size_t>(cfg.symbols_per_packet) * static_cast<std::size_t>(bps);
  const std::uint64_t blocks = (cfg.packets + kPacketBlock - 1) / kPacketBlock;
  std::vector<AuthTrialSummary> per_block(blocks);

  run_blocks(blocks, cfg.workers, [&](std::uint64_t b) {
    RngStream rng(cfg.master_seed, stream_ns + b);
    AuthTrialSummary s;
    s.packets = std::min(kPacketBlock, cfg.packets - b * kPacketBlock);
    for (std::uint64_t p = 0; p < s.packets; ++p) {
      AuthPacket pkt = make_packet(random_bits(n_bits, rng), cfg.key, emb);
      if (forge) {
        pkt.tag_bits = random_bits(pkt.tag_bits.size(), rng);
        for (std::size_t i = 0; i < pkt.symbols.size(); ++i) {
          const std::size_t m = pkt.message_indices[i];
          const double mean = pkt.tag_bits[i] ? emb.a2[m] : emb.a1[m];
          pkt.symbols[i] = std::sqrt(mean - cfg.channel.sigma2);
        }
      }
      switch (authenticate_roundtrip(pkt, emb, cfg.channel, rng)) {
        case AuthOutcome::accepted: ++s.accepted; break;
        case AuthOutcome::message_corrupted: ++s.message_corrupted; break;
        case AuthOutcome::tag_mismatch: ++s.tag_mismatch; break;
      }
    }
    per_block[b] = s;
  });

  AuthTrialSummary total;
  for (const auto& s : per_block) {
    total.packets += s.packets;
    total.accepted += s.accepted;
    total.message_corrupted += s.message_corrupted;
    total.tag_mismatch += s.tag_mismatch;
  }
  total.acceptance = make_estimate(total.accepted, total.packets);
  return total;
}

}  // namespace

std::vector<std::uint8_t> keyed_hash_bits(const std::vector<std::uint8_t>& bits,
                                          const std::vector<std::uint8_t>& key,
                                          std::size_t n_bits) {
  // Input: 32-bit counter, 64-bit bit length, packed bits (MSB first).
  std::vector<std::uint8_t> input(12);
  const std::uint64_t len = bits.size();
  for (int i = 0; i < 8; ++i) input[4 + i] = static_cast<std::uint8_t>(len >> (56 - 8 * i));
  const std::vector<std::uint8_t> packed = pack(bits);
  input.insert(input.end(), packed.begin(), packed.end());

  std::vector<std::uint8_t> out;
  out.reserve(n_bits);
  unsigned char digest[EVP_MAX_MD_SIZE];
  KeyedMac& mac = KeyedMac::for_key(key);
  for (std::uint32_t counter = 0; out.size() < n_bits; ++counter) {
    for (int i = 0; i < 4; ++i) input[i] = static_cast<std::uint8_t>(counter >> (24 - 8 * i));
    const std::size_t dlen = mac.digest(input, digest);
    for (std::size_t byte = 0; byte < dlen && out.size() < n_bits; ++byte) {
      for (int bit = 7; bit >= 0 && out.size() < n_bits; --bit) {
        out.push_back(static_cast<std::uint8_t>((digest[byte] >> bit) & 1u));
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> symbol_bits(std::size_t index, int bits_per_symbol) {
  const std::size_t gray = index ^ (index >> 1);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(bits_per_symbol));
  for (int b = 0; b < bits_per_symbol; ++b) {
    out[b] = static_cast<std::uint8_t>((gray >> (bits_per_symbol - 1 - b)) & 1u);
  }
  return out;
}

std::size_t symbol_index(const std::uint8_t* bits, int bits_per_symbol) {
  std::size_t gray = 0;
  for (int b = 0; b < bits_per_symbol; ++b) gray = (gray << 1) | (bits[b] & 1u);
  std::size_t index = gray;
  for (std::size_t shift = gray >> 1; shift; shift >>= 1) index ^= shift;
  return index;
}

AuthPacket make_packet(const std::vector<std::uint8_t>& message_bits,
                       const std::vector<std::uint8_t>& key,
                       const TagEmbedding& emb) {
  const int bps = bits_per_symbol(emb.size());
  if (message_bits.empty() || message_bits.size() % static_cast<std::size_t>(bps) != 0) {
    throw std::invalid_argument("message length must be a positive multiple of " +
                                std::to_string(bps) + " bits");
  }
  AuthPacket pkt;
  pkt.message_bits = message_bits;
  pkt.key = key;
  const std::size_t n_sym = message_bits.size() / static_cast<std::size_t>(bps);
  pkt.tag_bits = keyed_hash_bits(message_bits, key, n_sym);
  pkt.message_indices.resize(n_sym);
  pkt.symbols.resize(n_sym);
  const double sigma2 = emb.base.sigma2;
  for (std::size_t s = 0; s < n_sym; ++s) {
    const std::size_t m = symbol_index(message_bits.data() + s * bps, bps);
    pkt.message_indices[s] = m;
    const double mean = pkt.tag_bits[s] ? emb.a2[m] : emb.a1[m];
    pkt.symbols[s] = std::sqrt(mean - sigma2);  // |m|^2 + |t|^2 = A - sigma^2
  }
  return pkt;
}

std::string to_string(AuthOutcome o) {
  switch (o) {
    case AuthOutcome::accepted: return "accepted";
    case AuthOutcome::message_corrupted: return "message_corrupted";
    case AuthOutcome::tag_mismatch: return "tag_mismatch";
  }
  return "unknown";
}

AuthOutcome authenticate_roundtrip(const AuthPacket& packet,
                                   const TagEmbedding& emb,
                                   const AuthChannel& channel, RngStream& rng) {
  const int bps = bits_per_symbol(emb.size());
  EnergySampler sampler(channel.antennas);
  std::vector<std::uint8_t> received_bits;
  std::vector<std::uint8_t> received_tag;
  received_bits.reserve(packet.message_bits.size());
  received_tag.reserve(packet.symbols.size());
  for (double x : packet.symbols) {
    const double energy = received_energy(x * x + channel.sigma2, channel, sampler, rng);
    const Detection d = detect(energy, emb);
    const auto bits = symbol_bits(d.message, bps);
    received_bits.insert(received_bits.end(), bits.begin(), bits.end());
    received_tag.push_back(static_cast<std::uint8_t>(d.tag_bit));
  }
  const auto expected = keyed_hash_bits(received_bits, packet.key, received_tag.size());
  if (expected == received_tag) return AuthOutcome::accepted;
  return received_bits == packet.message_bits ? AuthOutcome::tag_mismatch
                                              : AuthOutcome::message_corrupted;
}

AuthTrialSummary run_legitimate_trials(const TagEmbedding& emb,
                                       const AuthTrialConfig& cfg) {
  return run_trials(emb, cfg, false, kLegitStreams);
}

AuthTrialSummary run_forgery_trials(const TagEmbedding& emb,
                                    const AuthTrialConfig& cfg) {
  return run_trials(emb, cfg, true, kForgeryStreams);
}

}  // namespace pla
