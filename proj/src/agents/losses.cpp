#include "ace/agents/losses.hpp"

#include <algorithm>

#include "ace/errors.hpp"
#include "ace/vpm/tree_search.hpp"

namespace ace::agents {

using num::NodeId;
using num::Tape;
using vpm::AceNetwork;

Batch make_batch(std::span<const memory::Transition> transitions) {
  if (transitions.empty()) throw ContractError("empty batch");
  const auto b = static_cast<Eigen::Index>(transitions.size());
  const auto& first = transitions.front();
  Batch out;
  out.s.resize(b, first.s.size());
  out.a.resize(b, first.a.size());
  out.r.resize(b, 1);
  out.s_next.resize(b, first.s_next.size());
  out.terminal.resize(transitions.size());
  out.actor.resize(transitions.size());
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& t = transitions[static_cast<std::size_t>(i)];
    out.s.row(i) = t.s.transpose();
    out.a.row(i) = t.a.transpose();
    out.r(i, 0) = t.r;
    out.s_next.row(i) = t.s_next.transpose();
    out.terminal[static_cast<std::size_t>(i)] = t.terminal ? 1 : 0;
    out.actor[static_cast<std::size_t>(i)] = std::max(t.actor, 0);
  }
  return out;
}

double bootstrap_target(double r, double gamma, bool terminal, std::span<const double> candidates) {
  if (terminal) return r;
  if (candidates.empty()) throw ContractError("bootstrap_target: no candidates");
  return r + gamma * *std::max_element(candidates.begin(), candidates.end());
}

LossSpec LossSpec::from(const AgentConfig& cfg) {
  const AgentConfig c = cfg.normalized();
  return LossSpec{c.variant, c.depth, c.gamma};
}

bool LossSpec::grounds_reward() const {
  if (variant == Variant::kTmAce) return true;
  // The reward head only enters the estimator once it is expanded.
  return (variant == Variant::kAce || variant == Variant::kAceAlt) && depth > 0;
}

NodeId half_mean_square(Tape& tape, NodeId pred, const Matrix& target) {
  const double b = static_cast<double>(tape.value(pred).rows());
  const NodeId diff = tape.add(pred, tape.constant(-target));
  return tape.scale(tape.sum(tape.square(diff)), 0.5 / b);
}

Matrix ensemble_targets(const AceNetwork& target, const Batch& batch, const LossSpec& spec) {
  const Matrix z_next = target.encode(batch.s_next);
  const std::vector<Matrix> proposals = target.act_all(target.policy_latent(batch.s_next));
  std::vector<Matrix> values;
  values.reserve(proposals.size());
  for (const Matrix& p : proposals) {
    values.push_back(vpm::tree_value(target, z_next, p, spec.train_depth(), spec.gamma));
  }
  Matrix y(batch.size(), 1);
  std::vector<double> cand(values.size());
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    for (std::size_t k = 0; k < values.size(); ++k) cand[k] = values[k](i, 0);
    y(i, 0) = bootstrap_target(batch.r(i, 0), spec.gamma, batch.terminal[static_cast<std::size_t>(i)] != 0,
                               cand);
  }
  return y;
}

CriticLossNodes build_critic_loss(Tape& tape, AceNetwork& online, const Batch& batch,
                                  const Matrix& targets, const LossSpec& spec) {
  const NodeId s = tape.constant(batch.s);
  const NodeId a = tape.constant(batch.a);
  const NodeId z = online.encode(tape, s, true);
  const NodeId q = vpm::tree_q(tape, online, z, a, spec.train_depth(), spec.gamma,
                               vpm::TreeTrack{.model = true, .actors = false});
  CriticLossNodes out;
  out.value_term = half_mean_square(tape, q, targets);
  out.total = out.value_term;
  if (spec.grounds_reward()) {
    out.reward_term = half_mean_square(tape, online.reward(tape, z, a, true), batch.r);
    out.total = tape.add(out.total, out.reward_term);
  }
  if (spec.variant == Variant::kTmAce) {
    const Matrix z_next = online.encode(batch.s_next);
    const NodeId predicted = online.transition(tape, z, a, true);
    const double b = static_cast<double>(batch.size());
    const NodeId diff = tape.add(predicted, tape.constant(-z_next));
    out.transition_term = tape.scale(tape.sum(tape.square(diff)), 0.5 / b);
    out.total = tape.add(out.total, out.transition_term);
  }
  return out;
}

NodeId build_actor_objective(Tape& tape, AceNetwork& policy, AceNetwork& critic,
                             const Batch& batch, const LossSpec& spec) {
  const NodeId s = tape.constant(batch.s);
  const NodeId z = policy.policy_latent(tape, s, true);
  // The critic sees the latent as data: only grad_a q reaches theta^mu.
  const NodeId z_critic =
      (&policy == &critic && !policy.shape().separate_actor_encoder)
          ? tape.constant(tape.value(z))
          : tape.constant(critic.encode(batch.s));
  const std::vector<NodeId> actions = policy.act_all(tape, z, true);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const vpm::TreeTrack frozen{};
  const int depth = spec.train_depth();

  if (spec.variant == Variant::kAceAlt) {
    const NodeId chosen = tape.select_rows(actions, batch.actor);
    const NodeId q = vpm::tree_q(tape, critic, z_critic, chosen, depth, spec.gamma, frozen);
    return tape.scale(tape.sum(q), inv_b);
  }
  NodeId total;
  for (const NodeId act : actions) {
    const NodeId q = vpm::tree_q(tape, critic, z_critic, act, depth, spec.gamma, frozen);
    const NodeId term = tape.scale(tape.sum(q), inv_b);
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

Matrix ddpg_targets(const AceNetwork& target, const Batch& batch, double gamma) {
  const Matrix z_next = target.encode(batch.s_next);
  const Matrix a_next = target.act(0, target.policy_latent(batch.s_next));
  const Matrix q_next = target.value(z_next, a_next);
  Matrix y(batch.size(), 1);
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const double cand = q_next(i, 0);
    y(i, 0) = bootstrap_target(batch.r(i, 0), gamma, batch.terminal[static_cast<std::size_t>(i)] != 0,
                               std::span<const double>(&cand, 1));
  }
  return y;
}

NodeId build_ddpg_critic_loss(Tape& tape, AceNetwork& online, const Batch& batch,
                              const Matrix& targets) {
  const NodeId z = online.encode(tape, tape.constant(batch.s), true);
  const NodeId q = online.value(tape, z, tape.constant(batch.a), true);
  return half_mean_square(tape, q, targets);
}

NodeId build_ddpg_actor_objective(Tape& tape, AceNetwork& policy, AceNetwork& critic,
                                  const Batch& batch) {
  const NodeId z = policy.policy_latent(tape, tape.constant(batch.s), true);
  const NodeId action = policy.act(tape, 0, z, true);
  const NodeId z_critic = tape.constant(critic.encode(batch.s));
  const NodeId q = critic.value(tape, z_critic, action, false);
  return tape.scale(tape.sum(q), 1.0 / static_cast<double>(batch.size()));
}

}  // namespace ace::agents
