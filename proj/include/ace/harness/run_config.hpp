#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ace/agents/config.hpp"

namespace ace::harness {

enum class Profile { kDesk, kPaper };

/// Everything a training run needs. Parsed from `key = value` lines.
struct RunConfig {
  std::string name = "run";
  std::string env = "lqr1d";
  Profile profile = Profile::kDesk;
  agents::AgentConfig agent;
  long total_steps = 30000;
  long eval_interval = 1000;
  int eval_episodes = 20;
  long checkpoint_interval = 10000;
  std::vector<std::uint64_t> seeds{0};
  std::string output = "runs";

  /// Throws ConfigError on the first invalid field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::string_view profile_name(Profile p);
/// Throws ConfigError for anything but `desk` or `paper`.
Profile parse_profile(std::string_view name);

/// Defaults of a profile before any key of the file is applied.
RunConfig profile_defaults(Profile p);

/// Parses config text: `key = value`, `#` starts a comment, blank lines are
/// ignored. `profile` is applied first wherever it appears; every other key
/// overrides it. Unknown or repeated keys throw ConfigError, as does a
/// config that fails validate().
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every key explicitly; parse_run_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Keys accepted by parse_run_config, in serialization order.
std::vector<std::string> config_keys();

/// Output root: $ACE_OUT if set and non-empty, else `config.output`.
std::filesystem::path output_root(const RunConfig& config);

}  // namespace ace::harness
