#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ace/numcore/types.hpp"

namespace ace::envs {

enum class EnvKind { kMultiMaxBandit, kPendulum, kLqr1d, kPointMaze };

/// Static description of an environment. Every action dimension lives in
/// [action_low, action_high] = [-1, 1].
struct EnvSpec {
  std::string name;
  EnvKind kind = EnvKind::kLqr1d;
  int obs_dim = 0;
  int act_dim = 0;
  double action_low = -1.0;
  double action_high = 1.0;
  int max_steps = 1;
  /// True if episodes can end in a physical terminal (bootstrapping is cut);
  /// otherwise every episode end is a timeout.
  bool physical_terminals = false;
};

/// Looks up `multimax-bandit | pendulum | lqr1d | point-maze`.
/// Throws ConfigError for anything else.
EnvSpec make_spec(std::string_view name);
std::vector<std::string> env_names();

struct StepResult {
  Vector observation;
  double reward = 0.0;
  /// Physical terminal: the value of the next state is zero.
  bool terminal = false;
  /// Episode cut by the step limit; the next state still has value.
  bool timeout = false;
  bool done() const { return terminal || timeout; }
};

/// Reward landscape shared by the bandit and the point maze:
/// 1.0 * exp(-|x - c1|^2 / 0.02) + 0.6 * exp(-|x - c2|^2 / 0.02).
double multimax_reward(double x0, double x1);
inline constexpr double kGlobalCenter[2] = {0.7, 0.7};
inline constexpr double kLocalCenter[2] = {-0.6, -0.6};

/// One environment instance. Value type; copying forks the episode.
class Env {
 public:
  explicit Env(EnvSpec spec);

  const EnvSpec& spec() const { return spec_; }

  /// Starts an episode; a deterministic function of (spec, seed).
  Vector reset(std::uint64_t seed);

  /// Advances one step. Action components are clamped to the bounds first.
  /// Throws ContractError if the episode is over or was never started,
  /// DimensionError on a wrong action length, NumericError on NaN/Inf.
  StepResult step(const Vector& action);

  const Vector& observation() const { return observation_; }
  /// Internal state: context (bandit), (theta, theta_dot) (pendulum),
  /// s (lqr1d), position (point maze).
  const Vector& state() const { return state_; }
  int elapsed() const { return elapsed_; }
  bool done() const { return done_; }
  /// An episode has been started and has not ended.
  bool running() const { return started_ && !done_; }

  /// Overwrites the internal state mid-episode; for analytic tests.
  void set_state(const Vector& state);

 private:
  Vector observe() const;

  EnvSpec spec_;
  Vector state_;
  Vector observation_;
  int elapsed_ = 0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace ace::envs
