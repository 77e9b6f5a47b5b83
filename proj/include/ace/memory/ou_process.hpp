#pragma once

#include <cstdint>

#include "ace/numcore/types.hpp"
#include "ace/rng.hpp"

namespace ace::memory {

struct OuSettings {
  double theta = 0.15;
  double sigma = 0.2;
  double mu = 0.0;
};

/// Ornstein-Uhlenbeck exploration noise, one independent coordinate per
/// action dimension:  x <- x + theta (mu - x) dt + sigma sqrt(dt) xi.
class OuProcess {
 public:
  /// Throws ConfigError for negative theta or sigma.
  OuProcess(int dim, OuSettings settings, std::uint64_t seed);

  /// Advances the process and returns the new value. Throws ContractError
  /// for dt <= 0 and NumericError if the state becomes non-finite.
  const Vector& next(double dt = 1.0);

  /// Puts the state back at the long-run mean.
  void reset();

  const Vector& value() const { return x_; }
  const OuSettings& settings() const { return settings_; }
  void set_value(const Vector& x) { x_ = x; }

 private:
  OuSettings settings_;
  Vector x_;
  Rng rng_;
};

}  // namespace ace::memory
