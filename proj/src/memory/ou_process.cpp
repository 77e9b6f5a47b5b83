#include "ace/memory/ou_process.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::memory {

OuProcess::OuProcess(int dim, OuSettings settings, std::uint64_t seed)
    : settings_(settings), x_(Vector::Constant(dim, settings.mu)), rng_(seed) {
  if (settings.theta < 0.0 || settings.sigma < 0.0) {
    throw ConfigError("OU theta and sigma must be non-negative");
  }
}

const Vector& OuProcess::next(double dt) {
  if (!(dt > 0.0)) throw ContractError("ou_next: dt must be positive");
  const double scale = settings_.sigma * std::sqrt(dt);
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    x_[i] += settings_.theta * (settings_.mu - x_[i]) * dt + scale * rng_.normal();
  }
  if (!x_.allFinite()) throw NumericError("ou_next: state became non-finite");
  return x_;
}

void OuProcess::reset() { x_.setConstant(settings_.mu); }

}  // namespace ace::memory
