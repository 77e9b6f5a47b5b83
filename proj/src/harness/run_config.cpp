#include "ace/harness/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ace/envs/env.hpp"
#include "ace/errors.hpp"

namespace ace::harness {

std::string_view profile_name(Profile p) { return p == Profile::kPaper ? "paper" : "desk"; }

Profile parse_profile(std::string_view name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected desk or paper)");
}

RunConfig profile_defaults(Profile p) {
  RunConfig c;
  c.profile = p;
  if (p == Profile::kPaper) {
    c.agent.latent = 400;
    c.agent.hidden = 300;
    c.agent.replay_capacity = 1000000;
    c.total_steps = 1000000;
    c.eval_interval = 10000;
    c.checkpoint_interval = 100000;
  }
  return c;
}

void RunConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\ \t") != std::string::npos) {
    throw ConfigError("name must be a non-empty single path component");
  }
  envs::make_spec(env);
  agent.validate();
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (checkpoint_interval < 1) throw ConfigError("checkpoint_interval must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (output.empty()) throw ConfigError("output must be non-empty");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::uint64_t>("seeds", trim(item)));
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field int_field(T agents::AgentConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.agent.*member = parse_number<T>(key, v); },
          [=](const RunConfig& c) { return std::to_string(c.agent.*member); }};
}

Field real_field(double agents::AgentConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.agent.*member = parse_number<double>(key, v); },
          [=](const RunConfig& c) { return format_double(c.agent.*member); }};
}

template <typename T>
Field run_int_field(T RunConfig::*member, const char* key) {
  return {[=](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  using agents::AgentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"name", {[](RunConfig& c, const std::string& v) { c.name = v; },
                [](const RunConfig& c) { return c.name; }}},
      {"env", {[](RunConfig& c, const std::string& v) { c.env = v; },
               [](const RunConfig& c) { return c.env; }}},
      {"profile", {[](RunConfig& c, const std::string& v) { c.profile = parse_profile(v); },
                   [](const RunConfig& c) { return std::string(profile_name(c.profile)); }}},
      {"variant",
       {[](RunConfig& c, const std::string& v) { c.agent.variant = agents::parse_variant(v); },
        [](const RunConfig& c) { return std::string(agents::variant_name(c.agent.variant)); }}},
      {"N", int_field(&AgentConfig::actors, "N")},
      {"d", int_field(&AgentConfig::depth, "d")},
      {"gamma", real_field(&AgentConfig::gamma, "gamma")},
      {"tau", real_field(&AgentConfig::tau, "tau")},
      {"batch_size", int_field(&AgentConfig::batch_size, "batch_size")},
      {"actor_lr", real_field(&AgentConfig::actor_lr, "actor_lr")},
      {"critic_lr", real_field(&AgentConfig::critic_lr, "critic_lr")},
      {"replay_capacity", int_field(&AgentConfig::replay_capacity, "replay_capacity")},
      {"ou_theta", real_field(&AgentConfig::ou_theta, "ou_theta")},
      {"ou_sigma", real_field(&AgentConfig::ou_sigma, "ou_sigma")},
      {"latent", int_field(&AgentConfig::latent, "latent")},
      {"hidden", int_field(&AgentConfig::hidden, "hidden")},
      {"actor_bias_init", real_field(&AgentConfig::actor_bias_init, "actor_bias_init")},
      {"total_steps", run_int_field(&RunConfig::total_steps, "total_steps")},
      {"eval_interval", run_int_field(&RunConfig::eval_interval, "eval_interval")},
      {"eval_episodes", run_int_field(&RunConfig::eval_episodes, "eval_episodes")},
      {"checkpoint_interval", run_int_field(&RunConfig::checkpoint_interval, "checkpoint_interval")},
      {"seeds", {[](RunConfig& c, const std::string& v) { c.seeds = parse_seeds(v); },
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                     out += (i ? "," : "") + std::to_string(c.seeds[i]);
                   }
                   return out;
                 }}},
      {"output", {[](RunConfig& c, const std::string& v) { c.output = v; },
                  [](const RunConfig& c) { return c.output; }}},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& kv : fields()) out.push_back(kv.first);
  return out;
}

RunConfig parse_run_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!find_field(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for " + key);
    entries.emplace_back(std::move(key), std::move(value));
  }
  Profile profile = Profile::kDesk;
  for (const auto& [k, v] : entries) {
    if (k == "profile") profile = parse_profile(v);
  }
  RunConfig c = profile_defaults(profile);
  for (const auto& [k, v] : entries) find_field(k)->set(c, v);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(c) + "\n";
  return out;
}

std::filesystem::path output_root(const RunConfig& c) {
  const char* env = std::getenv("ACE_OUT");
  if (env && *env) return env;
  return c.output;
}

}  // namespace ace::harness
