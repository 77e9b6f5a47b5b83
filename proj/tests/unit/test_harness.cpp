#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/harness/checks.hpp"
#include "ace/harness/experiments.hpp"
#include "ace/harness/run_config.hpp"

using namespace ace;
using namespace ace::harness;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ace-unit-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny(const std::string& name) {
  RunConfig c = parse_run_config(
      "env = lqr1d\n"
      "variant = ace\n"
      "N = 2\n"
      "d = 1\n"
      "batch_size = 8\n"
      "latent = 8\n"
      "hidden = 6\n"
      "total_steps = 250\n"
      "eval_interval = 100\n"
      "eval_episodes = 2\n"
      "checkpoint_interval = 200\n");
  c.name = name;
  return c;
}

struct ScopedEnv {
  ScopedEnv(const char* key, const std::string& value) : key_(key) { ::setenv(key, value.c_str(), 1); }
  ~ScopedEnv() { ::unsetenv(key_); }
  const char* key_;
};

}  // namespace

TEST_CASE("config text round trip") {
  RunConfig c;
  CHECK(parse_run_config(serialize(c)) == c);
  c.name = "x";
  c.env = "pendulum";
  c.agent.variant = agents::Variant::kAceAlt;
  c.agent.actors = 7;
  c.agent.depth = 2;
  c.agent.gamma = 0.95;
  c.agent.tau = 1.0 / 3.0;
  c.seeds = {3, 1, 4};
  CHECK(parse_run_config(serialize(c)) == c);
  const auto keys = config_keys();
  for (const auto& k : keys) CHECK(serialize(c).find(k + " = ") != std::string::npos);
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_run_config("warp = 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("N = 2\nN = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("N = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("N 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("gamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("env = cartpole\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("variant = sac\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("seeds = 1,,2\n"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.cfg"), ConfigError);
  const RunConfig c = parse_run_config("# comment\n\n  N = 3   # trailing\nseeds = 0,1,2\n");
  CHECK(c.agent.actors == 3);
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
}

TEST_CASE("profiles set defaults that explicit keys override") {
  const RunConfig paper = parse_run_config("profile = paper\n");
  CHECK(paper.agent.latent == 400);
  CHECK(paper.agent.hidden == 300);
  CHECK(paper.total_steps == 1000000);
  const RunConfig a = parse_run_config("latent = 32\nprofile = paper\n");
  const RunConfig b = parse_run_config("profile = paper\nlatent = 32\n");
  CHECK(a == b);
  CHECK(a.agent.latent == 32);
  CHECK(a.agent.hidden == 300);
  CHECK(parse_run_config("").agent.latent == 64);
  CHECK_THROWS_AS(parse_run_config("profile = huge\n"), ConfigError);
}

TEST_CASE("ACE_OUT overrides the output root") {
  RunConfig c;
  c.output = "somewhere";
  ::unsetenv("ACE_OUT");
  CHECK(output_root(c) == fs::path("somewhere"));
  {
    ScopedEnv env("ACE_OUT", "/tmp/elsewhere");
    CHECK(output_root(c) == fs::path("/tmp/elsewhere"));
  }
  ScopedEnv empty("ACE_OUT", "");
  CHECK(output_root(c) == fs::path("somewhere"));
}

TEST_CASE("training writes identical artifacts for identical seeds") {
  const RunConfig c = tiny("det");
  const fs::path root = scratch("det");
  const SeedRun a = train_seed(c, 4, root / "a");
  const SeedRun b = train_seed(c, 4, root / "b");
  for (const char* f : {"curve.csv", "best.txt", "config.cfg", "ckpt-200.bin", "final.bin"}) {
    REQUIRE(fs::exists(root / "a" / f));
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
  }
  const auto rows = read_curve(root / "a" / "curve.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].step == 100);
  CHECK(rows[2].step == 250);
  CHECK(rows[1].variant == "ace");
  CHECK(rows[1].episodes == 2);
  CHECK(rows[1].mean_return == a.evals[1].mean_return);
  CHECK(slurp(root / "a" / "curve.csv").rfind(curve_header(), 0) == 0);
  RunConfig recorded = c;
  recorded.seeds = {4};
  CHECK(parse_run_config(slurp(root / "a" / "config.cfg")) == recorded);

  const SeedRun other = train_seed(c, 5, root / "c");
  CHECK(slurp(root / "c" / "curve.csv") != slurp(root / "a" / "curve.csv"));
}

TEST_CASE("one directory per seed") {
  RunConfig c = tiny("multi");
  c.total_steps = 100;
  c.checkpoint_interval = 1000;
  c.seeds = {0, 1, 2, 3, 4};
  const fs::path root = scratch("multi");
  ScopedEnv env("ACE_OUT", root.string());
  std::ostringstream log;
  const auto runs = run_train(c, std::nullopt, log);
  CHECK(runs.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(fs::exists(root / "multi" / ("seed-" + std::to_string(k)) / "curve.csv"));
  }
  const auto single = run_train(c, 9, log);
  CHECK(single.size() == 1);
  CHECK(fs::exists(root / "multi" / "seed-9" / "final.bin"));
}

TEST_CASE("sweep summary can be rebuilt from the curves") {
  RunConfig c = tiny("grid");
  c.total_steps = 200;
  c.seeds = {0, 1};
  const fs::path root = scratch("grid");
  ScopedEnv env("ACE_OUT", root.string());
  std::ostringstream log;
  const auto rows = run_sweep(c, {1, 2}, {0, 1}, log);
  CHECK(rows.size() == 8);
  const auto written = read_summary(root / "grid" / "summary.csv");
  CHECK(written == rows);
  CHECK(summarize_sweep(root / "grid") == rows);
  CHECK(fs::exists(root / "grid" / "N2-d1" / "seed-1" / "curve.csv"));
  CHECK_THROWS_AS(run_sweep(c, {}, {0}, log), ConfigError);
}

TEST_CASE("curve reader rejects malformed files") {
  const fs::path root = scratch("curve");
  std::ofstream(root / "bad.csv") << curve_header() << "\n1,0,ace,notanumber,0,1\n";
  CHECK_THROWS_AS(read_curve(root / "bad.csv"), ConfigError);
  CHECK_THROWS_AS(read_curve(root / "missing.csv"), ConfigError);
}

TEST_CASE("actors that are copies of each other evaluate identically") {
  agents::AgentConfig ac;
  ac.variant = agents::Variant::kAce;
  ac.actors = 3;
  ac.depth = 1;
  ac.latent = 8;
  ac.hidden = 6;
  ac.actor_bias_init = 0.5;
  const auto spec = envs::make_spec("point-maze");
  agents::Agent agent(ac, spec);
  auto& ps = agent.online().params();
  for (int i : {1, 2}) {
    const std::string h = "actor.head" + std::to_string(i);
    ps.block(ps.index(h + ".w")).value = ps.block(ps.index("actor.head0.w")).value;
    ps.block(ps.index(h + ".b")).value = ps.block(ps.index("actor.head0.b")).value;
  }
  const fs::path root = scratch("div");
  save_agent(root / "a.bin", agent);
  const LoadedPolicy pol = load_policy(root / "a.bin", spec);
  CHECK(pol.depth == 1);
  const auto rows = run_diversity(pol, spec, 4, 0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].mean == rows[0].mean);
  CHECK(rows[2].mean == rows[0].mean);
  CHECK(run_eval(pol, spec, 4, 0).mean_return == rows[0].mean);
  CHECK_THROWS_AS(load_policy(root / "a.bin", envs::make_spec("pendulum")), ConfigError);
}

TEST_CASE("bench ordering predicate") {
  std::vector<BenchRow> rows = {{"ddpg", 0, 900}, {"ace(1,5)", 0, 300}, {"ace(1,10)", 0, 150},
                                {"ace(2,5)", 0, 60}};
  CHECK(bench_ordering_holds(rows));
  rows.push_back({"ddpg", 1, 900});
  rows.push_back({"ace(1,5)", 1, 100});
  rows.push_back({"ace(1,10)", 1, 150});
  rows.push_back({"ace(2,5)", 1, 60});
  CHECK_FALSE(bench_ordering_holds(rows));
}

TEST_CASE("a wrong gradient sign fails verification") {
  const auto mdp = verify_instance(0, 1);
  CHECK(theorem_errors(mdp).dipg < 1e-5);
  CHECK(theorem_errors(mdp, true).dipg > 1.0);
  CHECK(run_verify(VerifyOptions{.instances = 2}).passed());
  CHECK_FALSE(run_verify(VerifyOptions{.instances = 2, .flip_dipg_sign = true}).passed());
  CHECK(theorem_error(1.0, 1.0) == 0.0);
  CHECK(theorem_error(0.0, 1e-9) == doctest::Approx(1e-3));
}

#ifdef ACE_BIN
TEST_CASE("command line exit codes") {
  const fs::path root = scratch("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = "ACE_OUT=" + root.string() + " " + ACE_BIN + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  std::ofstream(root / "ok.cfg") << "name = ok\nenv = lqr1d\nlatent = 8\nhidden = 6\nbatch_size = 8\n"
                                    "total_steps = 50\neval_interval = 50\neval_episodes = 1\n";
  std::ofstream(root / "bad.cfg") << "warp = 9\n";
  std::ofstream(root / "nan.cfg") << "env = pendulum\ncritic_lr = 1e200\nactor_lr = 1e200\nbatch_size = 4\n"
                                     "latent = 8\nhidden = 6\ntotal_steps = 100\neval_interval = 100\n";
  CHECK(run("train --config " + (root / "ok.cfg").string()) == 0);
  CHECK(fs::exists(root / "ok" / "seed-0" / "final.bin"));
  CHECK(run("eval --ckpt " + (root / "ok" / "seed-0" / "final.bin").string() + " --env lqr1d --episodes 2") == 0);
  CHECK(run("eval --ckpt " + (root / "ok" / "seed-0" / "final.bin").string() + " --env pendulum") == 2);
  CHECK(run("train --config " + (root / "bad.cfg").string()) == 2);
  CHECK(run("train --config " + (root / "missing.cfg").string()) == 2);
  CHECK(run("train") == 2);
  CHECK(run("train --config " + (root / "nan.cfg").string()) == 3);
  CHECK(run("verify --instances 2") == 0);
  CHECK(run("verify --instances 2 --flip-dipg-sign") == 1);
}
#endif
