#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ace/numcore/param_store.hpp"
#include "ace/numcore/tape.hpp"

namespace ace::vpm {

/// Sizes and wiring of the function bundle.
struct NetworkShape {
  int obs_dim = 1;
  int act_dim = 1;
  int latent = 64;   ///< n, encoder width
  int hidden = 48;   ///< h, hidden width of every head
  int actors = 1;    ///< N
  /// DDPG wiring: the actor gets its own encoder instead of sharing the
  /// critic's.
  bool separate_actor_encoder = false;
  /// Whether reward and transition heads exist.
  bool has_model = true;
};

struct InitOptions {
  /// Half-width of the uniform init of final output layers.
  double output_range = 3e-3;
  /// Half-width of the uniform init of actor head biases (pre-tanh).
  double actor_bias_range = 3e-3;
};

/// The value-prediction model: encoder, reward head, residual transition
/// head, value head and N actor heads on a shared trunk.
///
///   z      = tanh(W_enc s + b)                      (n)
///   r(z,a) = out(tanh(W [z;a] + b))                 (scalar)
///   T(z,a) = z + tanh(G2 (z + tanh(G1 [z;a] + c1)) + c2)
///   q(z,a) = out(tanh(W [z;a] + b))                 (scalar)
///   mu_i(z)= tanh(H_i tanh(W_shared z + b) + c_i)   (m)
///
/// Every block is initialised from its own seed stream keyed by block name,
/// so two networks with the same seed agree on every block they share.
class AceNetwork {
 public:
  AceNetwork(NetworkShape shape, std::uint64_t seed, InitOptions init = {});
  /// Adopts existing parameters (e.g. from a checkpoint). Throws
  /// DimensionError if a block is missing or has the wrong shape.
  AceNetwork(NetworkShape shape, num::ParamStore params);

  const NetworkShape& shape() const { return shape_; }
  num::ParamStore& params() { return params_; }
  const num::ParamStore& params() const { return params_; }

  /// theta^Q: encoder, reward, transition and value blocks.
  std::vector<int> critic_blocks() const;
  /// theta^mu: the encoder feeding the actors plus trunk and heads.
  std::vector<int> actor_blocks() const;
  /// Blocks of one actor head.
  std::vector<int> head_blocks(int actor) const;

  // Taped evaluation. `track` makes the call's parameters accumulate
  // gradient on backward.
  num::NodeId encode(num::Tape& tape, num::NodeId obs, bool track);
  /// Latent fed to the actors; equals encode() unless the encoders are separate.
  num::NodeId policy_latent(num::Tape& tape, num::NodeId obs, bool track);
  num::NodeId act(num::Tape& tape, int actor, num::NodeId z, bool track);
  std::vector<num::NodeId> act_all(num::Tape& tape, num::NodeId z, bool track);
  num::NodeId reward(num::Tape& tape, num::NodeId z, num::NodeId a, bool track);
  num::NodeId transition(num::Tape& tape, num::NodeId z, num::NodeId a, bool track);
  num::NodeId value(num::Tape& tape, num::NodeId z, num::NodeId a, bool track);

  // Plain evaluation through the same kernels; bitwise equal to the taped
  // path on equal inputs.
  Matrix encode(const Matrix& obs) const;
  Matrix policy_latent(const Matrix& obs) const;
  Matrix act(int actor, const Matrix& z) const;
  std::vector<Matrix> act_all(const Matrix& z) const;
  Matrix reward(const Matrix& z, const Matrix& a) const;
  Matrix transition(const Matrix& z, const Matrix& a) const;
  Matrix value(const Matrix& z, const Matrix& a) const;

 private:
  struct Layer {
    int weight = -1;
    int bias = -1;
  };

  void bind_layers();
  void check_actor(int actor) const;
  num::NodeId layer(num::Tape& tape, const Layer& l, num::NodeId x, bool track);
  Matrix layer(const Layer& l, const Matrix& x) const;
  num::NodeId trunk(num::Tape& tape, num::NodeId z, bool track);
  Matrix trunk(const Matrix& z) const;

  NetworkShape shape_;
  num::ParamStore params_;
  Layer enc_, actor_enc_, shared_, q_hidden_, q_out_, rew_hidden_, rew_out_, g1_, g2_;
  std::vector<Layer> heads_;
};

}  // namespace ace::vpm
