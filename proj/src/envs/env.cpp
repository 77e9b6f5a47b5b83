#include "ace/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace::envs {

namespace {

constexpr double kPi = std::numbers::pi;

// Pendulum constants.
constexpr double kGravity = 10.0;
constexpr double kLength = 1.0;
constexpr double kMaxTorque = 2.0;
constexpr double kDt = 0.05;
constexpr double kMaxSpeed = 8.0;

// LQR1D constants.
constexpr double kLqrA = 0.9;
constexpr double kLqrB = 0.5;
constexpr double kLqrActionCost = 0.1;

constexpr double kMazeStep = 0.1;

double angle_normalize(double x) {
  double y = std::fmod(x + kPi, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  return y - kPi;
}

}  // namespace

double multimax_reward(double x0, double x1) {
  const double d1 = (x0 - kGlobalCenter[0]) * (x0 - kGlobalCenter[0]) +
                    (x1 - kGlobalCenter[1]) * (x1 - kGlobalCenter[1]);
  const double d2 = (x0 - kLocalCenter[0]) * (x0 - kLocalCenter[0]) +
                    (x1 - kLocalCenter[1]) * (x1 - kLocalCenter[1]);
  return 1.0 * std::exp(-d1 / 0.02) + 0.6 * std::exp(-d2 / 0.02);
}

EnvSpec make_spec(std::string_view name) {
  EnvSpec s;
  s.name = std::string(name);
  if (name == "multimax-bandit") {
    s.kind = EnvKind::kMultiMaxBandit;
    s.obs_dim = 2;
    s.act_dim = 2;
    s.max_steps = 1;
    s.physical_terminals = true;
  } else if (name == "pendulum") {
    s.kind = EnvKind::kPendulum;
    s.obs_dim = 3;
    s.act_dim = 1;
    s.max_steps = 200;
  } else if (name == "lqr1d") {
    s.kind = EnvKind::kLqr1d;
    s.obs_dim = 1;
    s.act_dim = 1;
    s.max_steps = 50;
  } else if (name == "point-maze") {
    s.kind = EnvKind::kPointMaze;
    s.obs_dim = 2;
    s.act_dim = 2;
    s.max_steps = 50;
  } else {
    throw ConfigError("unknown environment '" + std::string(name) + "'");
  }
  return s;
}

std::vector<std::string> env_names() {
  return {"multimax-bandit", "pendulum", "lqr1d", "point-maze"};
}

Env::Env(EnvSpec spec) : spec_(std::move(spec)) {
  if (spec_.obs_dim <= 0 || spec_.act_dim <= 0 || spec_.max_steps < 1 ||
      !(spec_.action_low < spec_.action_high)) {
    throw ConfigError("invalid environment spec '" + spec_.name + "'");
  }
}

Vector Env::observe() const {
  switch (spec_.kind) {
    case EnvKind::kPendulum: {
      Vector o(3);
      o << std::cos(state_[0]), std::sin(state_[0]), state_[1];
      return o;
    }
    default:
      return state_;
  }
}

Vector Env::reset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, spec_.name));
  switch (spec_.kind) {
    case EnvKind::kMultiMaxBandit:
    case EnvKind::kPointMaze:
      state_.resize(2);
      state_[0] = rng.uniform(-1.0, 1.0);
      state_[1] = rng.uniform(-1.0, 1.0);
      break;
    case EnvKind::kPendulum:
      state_.resize(2);
      state_[0] = kPi - rng.uniform(0.0, 2.0 * kPi);  // (-pi, pi]
      state_[1] = rng.uniform(-1.0, 1.0);
      break;
    case EnvKind::kLqr1d:
      state_.resize(1);
      state_[0] = rng.uniform(-1.0, 1.0);
      break;
  }
  elapsed_ = 0;
  started_ = true;
  done_ = false;
  observation_ = observe();
  return observation_;
}

void Env::set_state(const Vector& state) {
  if (state.size() != state_.size() && started_) {
    throw DimensionError("set_state: wrong state length");
  }
  state_ = state;
  observation_ = observe();
}

StepResult Env::step(const Vector& action) {
  if (!started_ || done_) {
    throw ContractError("step: episode of '" + spec_.name + "' is not running");
  }
  if (action.size() != spec_.act_dim) {
    throw DimensionError("step: action length " + std::to_string(action.size()) +
                         ", expected " + std::to_string(spec_.act_dim));
  }
  if (!action.allFinite()) throw NumericError("step: non-finite action");
  const Vector a = action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);

  StepResult out;
  switch (spec_.kind) {
    case EnvKind::kMultiMaxBandit:
      out.reward = multimax_reward(a[0], a[1]);
      out.terminal = true;
      break;
    case EnvKind::kPendulum: {
      const double th = state_[0];
      const double thdot = state_[1];
      const double u = kMaxTorque * a[0];
      const double an = angle_normalize(th);
      out.reward = -(an * an + 0.1 * thdot * thdot + 0.001 * u * u);
      // -(g/l) sin(th + pi) == (g/l) sin(th); the latter is exactly zero upright.
      const double acc = (kGravity / kLength) * std::sin(th) + 3.0 * u;
      const double new_thdot = std::clamp(thdot + acc * kDt, -kMaxSpeed, kMaxSpeed);
      state_[0] = th + new_thdot * kDt;
      state_[1] = new_thdot;
      break;
    }
    case EnvKind::kLqr1d: {
      const double s = state_[0];
      out.reward = -(s * s + kLqrActionCost * a[0] * a[0]);
      state_[0] = kLqrA * s + kLqrB * a[0];
      break;
    }
    case EnvKind::kPointMaze:
      state_[0] = std::clamp(state_[0] + kMazeStep * a[0], -1.0, 1.0);
      state_[1] = std::clamp(state_[1] + kMazeStep * a[1], -1.0, 1.0);
      out.reward = multimax_reward(state_[0], state_[1]);
      break;
  }
  ++elapsed_;
  if (!out.terminal && elapsed_ >= spec_.max_steps) out.timeout = true;
  done_ = out.done();
  observation_ = observe();
  out.observation = observation_;
  return out;
}

}  // namespace ace::envs
