#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ace/agents/config.hpp"
#include "ace/agents/losses.hpp"
#include "ace/envs/env.hpp"
#include "ace/memory/ou_process.hpp"
#include "ace/memory/replay_buffer.hpp"
#include "ace/numcore/adam.hpp"
#include "ace/rng.hpp"
#include "ace/vpm/ace_network.hpp"
#include "ace/vpm/tree_search.hpp"

namespace ace::agents {

/// One evaluation point of a run.
struct EvalRecord {
  long step = 0;
  std::uint64_t seed = 0;
  std::string variant;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  std::vector<double> returns;
  double wall_ms = 0.0;
};

struct StepMetrics {
  Vector action;        ///< executed (noisy, clamped) action
  int actor = 0;        ///< ensemble member whose proposal won the vote
  double reward = 0.0;
  bool episode_end = false;
  bool learned = false;  ///< false during warmup
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double transition_loss = 0.0;  ///< TM-ACE model loss, else 0
};

using Policy = std::function<Vector(const Vector&)>;

/// Deterministic episodes of `policy`; episode e starts from
/// derive_seed(seed, "eval", e). Throws ContractError for episodes < 1.
EvalRecord run_policy_episodes(const envs::EnvSpec& env, int episodes, std::uint64_t seed,
                               const Policy& policy);

/// Network shape for a variant on an environment.
vpm::NetworkShape network_shape(const AgentConfig& cfg, const envs::EnvSpec& env);

/// Online and target networks, optimizers, replay and exploration for one
/// run. Every random draw comes from a named sub-stream of `config.seed`.
class Agent {
 public:
  /// Throws ConfigError on an invalid config.
  Agent(const AgentConfig& config, envs::EnvSpec env);

  const AgentConfig& config() const { return config_; }
  const envs::EnvSpec& env_spec() const { return env_spec_; }

  /// One iteration: vote, add noise, act, store, and (after warmup) one
  /// critic step, one actor step and a soft target sync. Starts a new
  /// episode in `env` when needed. Throws NumericError with the step number
  /// if anything goes non-finite.
  StepMetrics train_step(envs::Env& env);

  /// Learning half of train_step on a given batch.
  StepMetrics learn(const Batch& batch);
  /// Critic loss on a batch with targets from the target network (no update).
  double critic_loss(const Batch& batch);
  double critic_update(const Batch& batch);
  double actor_update(const Batch& batch);
  /// target <- tau * online + (1 - tau) * target. Throws ContractError
  /// unless 0 < tau <= 1.
  void soft_sync(double tau);

  /// Greedy vote without noise.
  vpm::ActionChoice act_greedy(const Vector& obs) const;
  /// Deterministic episodes on fixed evaluation seeds.
  EvalRecord evaluate(int episodes) const;
  /// Same episodes driven by one actor alone. Throws ContractError on a bad
  /// index.
  EvalRecord evaluate_actor(int actor, int episodes) const;

  vpm::AceNetwork& online() { return online_; }
  const vpm::AceNetwork& online() const { return online_; }
  vpm::AceNetwork& target() { return target_; }
  const vpm::AceNetwork& target() const { return target_; }
  memory::ReplayBuffer& replay() { return replay_; }
  const memory::ReplayBuffer& replay() const { return replay_; }
  long steps() const { return steps_; }
  int last_actor() const { return last_actor_; }

  /// Seed used for the e-th evaluation episode of this run.
  std::uint64_t eval_seed(int episode) const;

 private:
  AgentConfig config_;
  envs::EnvSpec env_spec_;
  LossSpec loss_spec_;
  vpm::AceNetwork online_;
  vpm::AceNetwork target_;
  num::AdamState critic_opt_;
  num::AdamState actor_opt_;
  memory::ReplayBuffer replay_;
  memory::OuProcess noise_;
  Rng env_rng_;
  Rng replay_rng_;
  long steps_ = 0;
  int last_actor_ = 0;
};

}  // namespace ace::agents
