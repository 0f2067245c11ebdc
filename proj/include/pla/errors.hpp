#pragma once

#include <stdexcept>
#include <string>

namespace pla {

/// A configuration value is missing or out of range. `field()` is the dotted
/// path of the offending entry (e.g. "system.delta").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// The requested operating point admits no strictly feasible embedding.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double best_achievable_bound)
      : std::runtime_error(what), best_bound_(best_achievable_bound) {}
  /// Smallest message-SER bound reachable with zero tag power and the whole
  /// budget on the message (alpha = 1).
  double best_achievable_bound() const { return best_bound_; }

 private:
  double best_bound_;
};

/// The interior-point solver stopped without meeting its tolerances.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pla
