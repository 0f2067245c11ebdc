#include "pla/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "pla/errors.hpp"

namespace pla::app {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads members of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(node_.at(key), join(path_, key));
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(node_.at(key), join(path_, key));
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(node_.contains(key) ? node_.at(key) : empty, join(path_, key));
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(join(path_, item.key()), "unknown key");
      }
    }
  }

 private:
  template <class T>
  static T convert(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
      return x;
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<long long>() < 0) throw ConfigError(field, "must be >= 0");
      }
      return v.get<T>();
    } else {
      if (!v.is_array()) throw ConfigError(field, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(
            v.at(i), field + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_positive(int v, const std::string& field) {
  if (v < 1) throw ConfigError(field, "must be >= 1");
}

void check_positive(const std::vector<double>& v, const std::string& field) {
  if (v.empty()) throw ConfigError(field, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw ConfigError(field + "[" + std::to_string(i) + "]", "must be positive");
  }
}

}  // namespace

std::vector<std::uint8_t> parse_hex(const std::string& hex, const std::string& field) {
  if (hex.empty() || hex.size() % 2 != 0) {
    throw ConfigError(field, "expected a non-empty even-length hex string");
  }
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    unsigned value = 0;
    for (std::size_t j = i; j < i + 2; ++j) {
      const char ch = hex[j];
      unsigned d;
      if (ch >= '0' && ch <= '9') d = static_cast<unsigned>(ch - '0');
      else if (ch >= 'a' && ch <= 'f') d = static_cast<unsigned>(ch - 'a' + 10);
      else if (ch >= 'A' && ch <= 'F') d = static_cast<unsigned>(ch - 'A' + 10);
      else throw ConfigError(field, "not a hex digit: '" + std::string(1, ch) + "'");
      value = value * 16 + d;
    }
    out.push_back(static_cast<std::uint8_t>(value));
  }
  return out;
}

RunConfig parse_config(const json& doc) {
  if (doc.is_object() && doc.contains("config") && doc.contains("tool")) {
    return parse_config(doc.at("config"));
  }
  RunConfig c;
  Section root(doc, "");

  Section sys = root.child("system");
  sys.read("antennas", c.system.antennas);
  sys.read("noise_variance", c.system.sigma2);
  sys.read("constellation_size", c.system.constellation_size);
  sys.read("total_power", c.system.total_power);
  sys.read("message_power", c.system.message_power);
  sys.read("message_snr_db", c.message_snr_db);
  sys.read("delta", c.system.delta);
  sys.finish();

  Section emb = root.child("embedding");
  emb.read("k", c.k);
  emb.read("tag_ratio", c.tag_ratio);
  emb.finish();

  Section opt = root.child("optimize");
  if (opt.has("total_powers")) {
    opt.read("total_powers", c.total_powers);
  } else if (c.system.total_power) {
    c.total_powers = {*c.system.total_power};
  }
  opt.read("grid_points", c.allocation.grid_points);
  opt.read("alpha0_tolerance", c.allocation.alpha0_tolerance);
  opt.read("golden_tolerance", c.allocation.golden_tolerance);
  Section solver = opt.child("solver");
  solver.read("initial_t", c.allocation.solver.initial_t);
  solver.read("barrier_growth", c.allocation.solver.barrier_growth);
  solver.read("gap_tolerance", c.allocation.solver.gap_tolerance);
  solver.read("centering_tolerance", c.allocation.solver.centering_tolerance);
  solver.read("max_newton_steps", c.allocation.solver.max_newton_steps);
  solver.read("max_total_steps", c.allocation.solver.max_total_steps);
  solver.finish();
  opt.finish();

  Section trade = root.child("tradeoff");
  trade.read("deltas", c.deltas);
  trade.finish();

  Section sim = root.child("simulate");
  sim.read("trials", c.sim.trials);
  sim.read("seed", c.sim.master_seed);
  sim.read("workers", c.sim.workers);
  sim.read("full_vector", c.sim.full_vector);
  sim.read("snr_db", c.snr_db);
  sim.read("reference_snr_db", c.reference_snr_db);
  sim.read("tag_budget", c.tag_budget);
  Section auth = sim.child("auth");
  auth.read("packets", c.auth.packets);
  auth.read("symbols_per_packet", c.auth.symbols_per_packet);
  auth.read("forgery_packets", c.auth.forgery_packets);
  auth.read("forgery_symbols", c.auth.forgery_symbols);
  auth.read("key_hex", c.auth.key_hex);
  auth.read("noiseless", c.auth.noiseless);
  auth.finish();
  sim.finish();

  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

void resolve(RunConfig& c) {
  if (c.message_snr_db) {
    const double em = c.system.sigma2 * std::pow(10.0, *c.message_snr_db / 10.0);
    if (c.system.message_power && std::abs(*c.system.message_power - em) > 1e-12 * em) {
      throw ConfigError("system.message_snr_db", "conflicts with system.message_power");
    }
    c.system.message_power = em;
  }
  c.system.validate();
  if (c.system.antennas > 1024) throw ConfigError("system.antennas", "must be <= 1024");
  const int l = c.system.constellation_size;
  if (l > 16 || (l & (l - 1)) != 0) {
    throw ConfigError("system.constellation_size", "must be one of 2, 4, 8, 16");
  }
  if (!(c.tag_ratio > 0.0 && c.tag_ratio < 1.0)) {
    throw ConfigError("embedding.tag_ratio", "must lie in (0, 1]");
  }
  check_positive(c.total_powers, "optimize.total_powers");
  if (c.allocation.grid_points < 2) throw ConfigError("optimize.grid_points", "must be >= 2");
  check_positive(c.deltas, "tradeoff.deltas");
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] <= 1.0)) {
      throw ConfigError("tradeoff.deltas[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
  }
  if (c.sim.trials < 1) throw ConfigError("simulate.trials", "must be >= 1");
  check_positive(c.sim.workers, "simulate.workers");
  if (c.snr_db.empty()) throw ConfigError("simulate.snr_db", "must not be empty");
  if (c.tag_budget && !(*c.tag_budget > 0.0)) {
    throw ConfigError("simulate.tag_budget", "must be positive");
  }
  check_positive(c.auth.symbols_per_packet, "simulate.auth.symbols_per_packet");
  check_positive(c.auth.forgery_symbols, "simulate.auth.forgery_symbols");
  parse_hex(c.auth.key_hex, "simulate.auth.key_hex");
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto& sys = j["system"];
  sys["antennas"] = c.system.antennas;
  sys["noise_variance"] = c.system.sigma2;
  sys["constellation_size"] = c.system.constellation_size;
  sys["total_power"] = c.system.total_power ? nlohmann::ordered_json(*c.system.total_power) : nullptr;
  sys["message_power"] = c.system.message_power ? nlohmann::ordered_json(*c.system.message_power) : nullptr;
  sys["message_snr_db"] = c.message_snr_db ? nlohmann::ordered_json(*c.message_snr_db) : nullptr;
  sys["delta"] = c.system.delta;

  auto& emb = j["embedding"];
  emb["k"] = c.k ? nlohmann::ordered_json(*c.k) : nullptr;
  emb["tag_ratio"] = c.tag_ratio;

  auto& opt = j["optimize"];
  opt["total_powers"] = c.total_powers;
  opt["grid_points"] = c.allocation.grid_points;
  opt["alpha0_tolerance"] = c.allocation.alpha0_tolerance;
  opt["golden_tolerance"] = c.allocation.golden_tolerance;
  auto& solver = opt["solver"];
  solver["initial_t"] = c.allocation.solver.initial_t;
  solver["barrier_growth"] = c.allocation.solver.barrier_growth;
  solver["gap_tolerance"] = c.allocation.solver.gap_tolerance;
  solver["centering_tolerance"] = c.allocation.solver.centering_tolerance;
  solver["max_newton_steps"] = c.allocation.solver.max_newton_steps;
  solver["max_total_steps"] = c.allocation.solver.max_total_steps;

  j["tradeoff"]["deltas"] = c.deltas;

  auto& sim = j["simulate"];
  sim["trials"] = c.sim.trials;
  sim["seed"] = c.sim.master_seed;
  sim["workers"] = c.sim.workers;
  sim["full_vector"] = c.sim.full_vector;
  sim["snr_db"] = c.snr_db;
  sim["reference_snr_db"] = c.reference_snr_db;
  sim["tag_budget"] = c.tag_budget ? nlohmann::ordered_json(*c.tag_budget) : nullptr;
  auto& auth = sim["auth"];
  auth["packets"] = c.auth.packets;
  auth["symbols_per_packet"] = c.auth.symbols_per_packet;
  auth["forgery_packets"] = c.auth.forgery_packets;
  auth["forgery_symbols"] = c.auth.forgery_symbols;
  auth["key_hex"] = c.auth.key_hex;
  auth["noiseless"] = c.auth.noiseless;
  return j;
}

}  // namespace pla::app
