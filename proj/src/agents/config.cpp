#include "ace/agents/config.hpp"

#include <array>
#include <utility>

#include "ace/errors.hpp"

namespace ace::agents {

namespace {
constexpr std::array<std::pair<Variant, std::string_view>, 7> kNames{{
    {Variant::kDdpg, "ddpg"},
    {Variant::kWideDdpg, "wide-ddpg"},
    {Variant::kSharedDdpg, "shared-ddpg"},
    {Variant::kEnsembleDdpg, "ensemble-ddpg"},
    {Variant::kTmAce, "tm-ace"},
    {Variant::kAce, "ace"},
    {Variant::kAceAlt, "ace-alt"},
}};
}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [k, n] : kNames) {
    if (k == v) return n;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::vector<std::string> variant_names() {
  std::vector<std::string> out;
  for (const auto& kv : kNames) out.emplace_back(kv.second);
  return out;
}

bool is_ddpg_family(Variant v) {
  return v == Variant::kDdpg || v == Variant::kWideDdpg || v == Variant::kSharedDdpg;
}

AgentConfig AgentConfig::normalized() const {
  AgentConfig c = *this;
  if (is_ddpg_family(c.variant)) {
    c.actors = 1;
    c.depth = 0;
  }
  if (c.variant == Variant::kEnsembleDdpg) c.depth = 0;
  return c;
}

void AgentConfig::validate() const {
  if (actors < 1) throw ConfigError("N must be >= 1");
  if (depth < 0) throw ConfigError("d must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
  if (ou_theta < 0.0 || ou_sigma < 0.0) throw ConfigError("OU parameters must be non-negative");
  if (latent < 1 || hidden < 1) throw ConfigError("latent and hidden sizes must be >= 1");
  if (actor_bias_init < 0.0) throw ConfigError("actor_bias_init must be non-negative");
  if (is_ddpg_family(variant) && (actors != 1 || depth != 0)) {
    throw ConfigError(std::string(variant_name(variant)) + " requires N = 1 and d = 0");
  }
  if (variant == Variant::kEnsembleDdpg && depth != 0) {
    throw ConfigError("ensemble-ddpg requires d = 0");
  }
}

}  // namespace ace::agents
