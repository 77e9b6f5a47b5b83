#include "ace/agents/agent.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::agents {

using num::NodeId;
using num::Tape;

vpm::NetworkShape network_shape(const AgentConfig& cfg, const envs::EnvSpec& env) {
  const AgentConfig c = cfg.normalized();
  vpm::NetworkShape s;
  s.obs_dim = env.obs_dim;
  s.act_dim = env.act_dim;
  s.latent = c.latent;
  s.hidden = c.hidden;
  s.actors = c.actors;
  s.separate_actor_encoder = c.variant == Variant::kDdpg || c.variant == Variant::kWideDdpg;
  s.has_model =
      c.variant == Variant::kAce || c.variant == Variant::kAceAlt || c.variant == Variant::kTmAce;
  if (c.variant == Variant::kWideDdpg) {
    s.latent *= 2;
    s.hidden *= 2;
  }
  return s;
}

namespace {
AgentConfig checked(const AgentConfig& cfg) {
  AgentConfig c = cfg.normalized();
  c.validate();
  return c;
}
}  // namespace

Agent::Agent(const AgentConfig& config, envs::EnvSpec env)
    : config_(checked(config)),
      env_spec_(std::move(env)),
      loss_spec_(LossSpec::from(config_)),
      online_(network_shape(config_, env_spec_), derive_seed(config_.seed, "init"),
              vpm::InitOptions{.output_range = 3e-3, .actor_bias_range = config_.actor_bias_init}),
      target_(online_),
      critic_opt_(online_.params(), online_.critic_blocks(),
                  num::AdamSettings{.learning_rate = config_.critic_lr}),
      actor_opt_(online_.params(), online_.actor_blocks(),
                 num::AdamSettings{.learning_rate = config_.actor_lr}),
      replay_(config_.replay_capacity, env_spec_.obs_dim, env_spec_.act_dim),
      noise_(env_spec_.act_dim, memory::OuSettings{.theta = config_.ou_theta, .sigma = config_.ou_sigma},
             derive_seed(config_.seed, "noise")),
      env_rng_(derive_seed(config_.seed, "env")),
      replay_rng_(derive_seed(config_.seed, "replay")) {}

EvalRecord run_policy_episodes(const envs::EnvSpec& spec, int episodes, std::uint64_t seed,
                               const Policy& policy) {
  if (episodes < 1) throw ContractError("evaluate: need at least one episode");
  EvalRecord rec;
  rec.seed = seed;
  envs::Env env(spec);
  for (int e = 0; e < episodes; ++e) {
    env.reset(derive_seed(seed, "eval", static_cast<std::uint64_t>(e)));
    double ret = 0.0;
    while (env.running()) ret += env.step(policy(env.observation())).reward;
    rec.returns.push_back(ret);
  }
  double mean = 0.0;
  for (double r : rec.returns) mean += r;
  mean /= static_cast<double>(episodes);
  double var = 0.0;
  for (double r : rec.returns) var += (r - mean) * (r - mean);
  rec.mean_return = mean;
  rec.stderr_return = episodes > 1 ? std::sqrt(var / static_cast<double>(episodes - 1) /
                                               static_cast<double>(episodes))
                                   : 0.0;
  return rec;
}

std::uint64_t Agent::eval_seed(int episode) const {
  return derive_seed(config_.seed, "eval", static_cast<std::uint64_t>(episode));
}

vpm::ActionChoice Agent::act_greedy(const Vector& obs) const {
  return vpm::select_action(online_, obs, config_.depth, config_.gamma);
}

double Agent::critic_loss(const Batch& batch) {
  Tape tape;
  if (is_ddpg_family(config_.variant)) {
    const Matrix y = ddpg_targets(target_, batch, config_.gamma);
    return tape.value(build_ddpg_critic_loss(tape, online_, batch, y))(0, 0);
  }
  const Matrix y = ensemble_targets(target_, batch, loss_spec_);
  return tape.value(build_critic_loss(tape, online_, batch, y, loss_spec_).total)(0, 0);
}

double Agent::critic_update(const Batch& batch) {
  auto& params = online_.params();
  params.zero_grad();
  Tape tape;
  NodeId loss;
  if (is_ddpg_family(config_.variant)) {
    const Matrix y = ddpg_targets(target_, batch, config_.gamma);
    loss = build_ddpg_critic_loss(tape, online_, batch, y);
  } else {
    const Matrix y = ensemble_targets(target_, batch, loss_spec_);
    loss = build_critic_loss(tape, online_, batch, y, loss_spec_).total;
  }
  tape.backward(loss);
  num::adam_step(params, critic_opt_);
  return tape.value(loss)(0, 0);
}

double Agent::actor_update(const Batch& batch) {
  auto& params = online_.params();
  params.zero_grad();
  Tape tape;
  const NodeId objective = is_ddpg_family(config_.variant)
                               ? build_ddpg_actor_objective(tape, online_, online_, batch)
                               : build_actor_objective(tape, online_, online_, batch, loss_spec_);
  // Gradient ascent on the objective.
  tape.backward(tape.scale(objective, -1.0));
  num::adam_step(params, actor_opt_);
  params.zero_grad();
  return tape.value(objective)(0, 0);
}

void Agent::soft_sync(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ContractError("soft_sync: tau must lie in (0, 1]");
  auto& dst = target_.params();
  const auto& src = online_.params();
  for (int i = 0; i < dst.size(); ++i) {
    Matrix& t = dst.block(i).value;
    const Matrix& o = src.block(i).value;
    if (tau == 1.0) {
      t = o;
    } else {
      t += tau * (o - t);
    }
  }
  dst.bump_version();
}

StepMetrics Agent::learn(const Batch& batch) {
  StepMetrics m;
  m.learned = true;
  if (config_.variant == Variant::kTmAce) {
    // Report the model term separately from the same loss evaluation.
    Tape probe;
    const Matrix y = ensemble_targets(target_, batch, loss_spec_);
    const auto nodes = build_critic_loss(probe, online_, batch, y, loss_spec_);
    m.transition_loss = probe.value(nodes.transition_term)(0, 0);
  }
  m.critic_loss = critic_update(batch);
  m.actor_objective = actor_update(batch);
  soft_sync(config_.tau);
  return m;
}

StepMetrics Agent::train_step(envs::Env& env) {
  try {
    if (!env.running()) {
      env.reset(env_rng_.next_u64());
      noise_.reset();
    }
    const Vector obs = env.observation();
    const vpm::ActionChoice choice = act_greedy(obs);
    const Vector& noise = noise_.next(1.0);
    const Vector action = (choice.action + noise).cwiseMax(-1.0).cwiseMin(1.0);
    const envs::StepResult res = env.step(action);
    replay_.push(memory::Transition{obs, action, res.reward, res.observation, res.terminal,
                                    choice.actor});
    last_actor_ = choice.actor;

    StepMetrics m;
    if (replay_.size() >= static_cast<std::size_t>(config_.batch_size)) {
      const auto sample = replay_.sample(static_cast<std::size_t>(config_.batch_size), replay_rng_);
      m = learn(make_batch(sample));
    }
    m.action = action;
    m.actor = choice.actor;
    m.reward = res.reward;
    m.episode_end = res.done();
    ++steps_;
    return m;
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(steps_) + ": " + e.what());
  }
}

EvalRecord Agent::evaluate(int episodes) const {
  EvalRecord rec = run_policy_episodes(env_spec_, episodes, config_.seed,
                                       [this](const Vector& obs) { return act_greedy(obs).action; });
  rec.step = steps_;
  rec.variant = std::string(variant_name(config_.variant));
  return rec;
}

EvalRecord Agent::evaluate_actor(int actor, int episodes) const {
  if (actor < 0 || actor >= online_.shape().actors) {
    throw ContractError("evaluate_actor: index out of range");
  }
  EvalRecord rec =
      run_policy_episodes(env_spec_, episodes, config_.seed, [this, actor](const Vector& obs) -> Vector {
        const Matrix o = obs.transpose();
        return online_.act(actor, online_.policy_latent(o)).row(0).transpose();
      });
  rec.step = steps_;
  rec.variant = std::string(variant_name(config_.variant));
  return rec;
}

}  // namespace ace::agents
