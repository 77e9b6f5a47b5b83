#pragma once

#include <span>
#include <vector>

#include "ace/agents/config.hpp"
#include "ace/memory/replay_buffer.hpp"
#include "ace/numcore/tape.hpp"
#include "ace/vpm/ace_network.hpp"

namespace ace::agents {

/// A sampled batch laid out as batch-major matrices.
struct Batch {
  Matrix s;
  Matrix a;
  Matrix r;  ///< B x 1
  Matrix s_next;
  std::vector<char> terminal;
  std::vector<int> actor;
  Eigen::Index size() const { return s.rows(); }
};

/// Throws ContractError on an empty batch.
Batch make_batch(std::span<const memory::Transition> transitions);

/// y = r for a physical terminal, otherwise r + gamma * max(candidates).
double bootstrap_target(double r, double gamma, bool terminal, std::span<const double> candidates);

/// What the losses need from the agent config.
struct LossSpec {
  Variant variant = Variant::kAce;
  int depth = 1;
  double gamma = 0.99;

  static LossSpec from(const AgentConfig& cfg);
  /// Depth of the estimator used for training targets and predictions
  /// (TM-ACE trains the unexpanded value head).
  int train_depth() const { return variant == Variant::kTmAce ? 0 : depth; }
  /// Whether the reward head is grounded against observed rewards.
  bool grounds_reward() const;
};

// ---- tree-search (ensemble) path: ensemble-ddpg, tm-ace, ace, ace-alt ----

/// Bootstrap targets max_i q^d(z', mu_i(z')) from the target network, B x 1.
Matrix ensemble_targets(const vpm::AceNetwork& target, const Batch& batch, const LossSpec& spec);

struct CriticLossNodes {
  num::NodeId total;
  num::NodeId value_term;
  num::NodeId reward_term;      ///< invalid when the reward is not grounded
  num::NodeId transition_term;  ///< TM-ACE only
};

/// mean_b 1/2 (q^d(z, a) - y)^2 [+ 1/2 (r(z, a) - r)^2] [+ 1/2 |T(z, a) - enc(s')|^2]
/// with theta^Q tracked; the targets are constants.
CriticLossNodes build_critic_loss(num::Tape& tape, vpm::AceNetwork& online, const Batch& batch,
                                  const Matrix& targets, const LossSpec& spec);

/// sum_i mean_b q^d(z, mu_i(z)) (ACE-Alt: only the stored actor per row).
/// Gradient reaches `policy`'s encoder, trunk and heads through the root
/// actions only; `critic` is read as constants and may alias `policy`.
num::NodeId build_actor_objective(num::Tape& tape, vpm::AceNetwork& policy,
                                  vpm::AceNetwork& critic, const Batch& batch,
                                  const LossSpec& spec);

// ---- single-actor DDPG path: ddpg, wide-ddpg, shared-ddpg ----

/// r + gamma * Q'(s', mu'(s')), B x 1.
Matrix ddpg_targets(const vpm::AceNetwork& target, const Batch& batch, double gamma);
/// mean_b 1/2 (Q(s, a) - y)^2.
num::NodeId build_ddpg_critic_loss(num::Tape& tape, vpm::AceNetwork& online, const Batch& batch,
                                   const Matrix& targets);
/// mean_b Q(s, mu(s)), gradient into the actor only.
num::NodeId build_ddpg_actor_objective(num::Tape& tape, vpm::AceNetwork& policy,
                                       vpm::AceNetwork& critic, const Batch& batch);

/// Shared loss helper: sum_b 1/2 (pred_b - target_b)^2 / B.
num::NodeId half_mean_square(num::Tape& tape, num::NodeId pred, const Matrix& target);

}  // namespace ace::agents
