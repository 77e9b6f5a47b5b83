#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ace::agents {

enum class Variant { kDdpg, kWideDdpg, kSharedDdpg, kEnsembleDdpg, kTmAce, kAce, kAceAlt };

std::string_view variant_name(Variant v);
/// Throws ConfigError for an unknown name.
Variant parse_variant(std::string_view name);
std::vector<std::string> variant_names();

/// Variants trained with the single-actor DDPG update (separate code path).
bool is_ddpg_family(Variant v);

struct AgentConfig {
  Variant variant = Variant::kAce;
  int actors = 5;          ///< N
  int depth = 1;           ///< d
  double gamma = 0.99;
  double tau = 0.001;
  int batch_size = 64;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::size_t replay_capacity = 100000;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  int latent = 64;
  int hidden = 48;
  /// Half-width of the uniform init of actor head biases.
  double actor_bias_init = 3e-3;
  std::uint64_t seed = 0;

  /// Applies the structural constraints of the variant (N = 1 and d = 0 for
  /// the DDPG family, d = 0 for Ensemble-DDPG). Wide-DDPG's doubled widths
  /// are applied by network_shape().
  AgentConfig normalized() const;
  /// Throws ConfigError on any out-of-range value.
  void validate() const;
  bool operator==(const AgentConfig&) const = default;
};

}  // namespace ace::agents
