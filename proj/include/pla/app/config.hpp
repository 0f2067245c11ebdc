#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pla/constellation.hpp"
#include "pla/optimize.hpp"
#include "pla/simulate.hpp"

namespace pla::app {

struct AuthSettings {
  std::uint64_t packets = 100'000;
  int symbols_per_packet = 32;
  std::uint64_t forgery_packets = std::uint64_t{1} << 20;
  int forgery_symbols = 10;
  std::string key_hex = "000102030405060708090a0b0c0d0e0f";
  bool noiseless = false;
};

/// Everything a run needs. Unset sections keep the defaults below.
struct RunConfig {
  SystemConfig system;
  std::optional<double> message_snr_db;  // alternative to system.message_power

  // embedding
  std::optional<std::vector<double>> k;
  double tag_ratio = 0.5;

  // optimize / tradeoff
  std::vector<double> total_powers{10, 15, 20, 30};
  AllocationOptions allocation;
  std::vector<double> deltas{1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3};

  // simulate
  SimConfig sim;
  std::vector<double> snr_db{6, 7, 8, 9, 10, 11, 12};
  double reference_snr_db = 10.0;
  std::optional<double> tag_budget;
  AuthSettings auth;
};

/// Parses a config document. A run manifest is accepted as well; its
/// "config" member is used. Unknown keys and wrong types raise ConfigError
/// with the dotted path of the entry.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Full snapshot of the effective configuration (every field, defaults
/// included). parse_config(config_to_json(c)) reproduces c.
nlohmann::ordered_json config_to_json(const RunConfig& c);

/// Fills system.message_power from message_snr_db when needed and validates.
void resolve(RunConfig& c);

std::vector<std::uint8_t> parse_hex(const std::string& hex, const std::string& field);

}  // namespace pla::app
