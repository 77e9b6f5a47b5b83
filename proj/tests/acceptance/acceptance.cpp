// Acceptance checks. Prints one PASS/FAIL line per criterion; `--only k`
// runs a single criterion. Exit status is non-zero if any selected check fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ace/errors.hpp"
#include "ace/harness/checks.hpp"
#include "ace/harness/experiments.hpp"
#include "ace/harness/run_config.hpp"
#include "ace/ocad/option_critic.hpp"

using namespace ace;
using namespace ace::harness;
using agents::Variant;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig config_file(const std::string& name) {
  return load_run_config(fs::path(ACE_CONFIGS) / name);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Scalar discounted Riccati fixed point for the LQR1D task.
double lqr_gain() {
  const double a = 0.9, b = 0.5, r = 0.1, gamma = 0.99;
  double p = 1.0;
  for (int i = 0; i < 100000; ++i) {
    const double next = 1.0 + gamma * a * a * p - std::pow(gamma * a * b * p, 2) / (r + gamma * b * b * p);
    if (next == p) break;
    p = next;
  }
  return gamma * a * b * p / (r + gamma * b * b * p);
}

// ---- 1 ----
Outcome theorem_verification() {
  const auto t0 = Clock::now();
  const int instances = 12;
  double dipg = 0.0, term = 0.0;
  for (int i = 0; i < instances; ++i) {
    const auto e = theorem_errors(verify_instance(0, i));
    dipg = std::max(dipg, e.dipg);
    term = std::max(term, e.termination);
  }
  const double secs = seconds_since(t0);
  return {dipg < 1e-5 && term < 1e-5 && secs < 60.0,
          fmt("%d instances, max rel err dipg %.2e, termination %.2e (tol 1e-5), %.1f s", instances, dipg,
              term, secs)};
}

// ---- 2 ----
Outcome gradient_checks() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int cases = 0, ties = 0;
  for (GradTarget t : {GradTarget::kCriticLoss, GradTarget::kActorObjective, GradTarget::kTreeQ}) {
    for (int n : {1, 2, 5}) {
      for (int d : {0, 1, 2}) {
        const auto r = grad_suite(t, Variant::kAce, n, d, 20);
        worst = std::max(worst, r.max_error);
        cases += r.cases;
        ties += r.excluded_ties;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && cases == 3 * 9 * 20 && secs < 120.0,
          fmt("%d cases, %d near-tie draws excluded, max rel err %.2e (tol 1e-4), %.1f s", cases, ties, worst,
              secs)};
}

// ---- 3 ----
Outcome tree_oracle() {
  const auto r = tree_oracle_suite(1000);
  return {r.cases == 1000 && r.mismatches == 0 && r.depth0_mismatches == 0,
          fmt("%d cases, %d mismatches (max |diff| %.3g), %d depth-0 mismatches", r.cases, r.mismatches,
              r.max_abs_diff, r.depth0_mismatches)};
}

// ---- 4 ----
Outcome reduction_equivalence() {
  const auto spec = envs::make_spec("pendulum");
  agents::AgentConfig base;
  base.actors = 1;
  base.depth = 0;
  base.seed = 11;
  agents::AgentConfig ace_cfg = base;
  ace_cfg.variant = Variant::kAce;
  agents::AgentConfig shared_cfg = base;
  shared_cfg.variant = Variant::kSharedDdpg;
  agents::Agent a(ace_cfg, spec);
  agents::Agent b(shared_cfg, spec);
  envs::Env ea(spec), eb(spec);

  const auto& pb = b.online().params();
  std::vector<std::pair<int, int>> pairs;  // (index in a, index in b)
  for (int i = 0; i < pb.size(); ++i) pairs.emplace_back(a.online().params().index(pb.block(i).name), i);

  int first_diff = -1;
  for (int step = 1; step <= 1000 && first_diff < 0; ++step) {
    const auto ma = a.train_step(ea);
    const auto mb = b.train_step(eb);
    bool same = ma.action == mb.action && ma.critic_loss == mb.critic_loss;
    for (const auto& [ia, ib] : pairs) {
      same = same && a.online().params().block(ia).value == pb.block(ib).value &&
             a.target().params().block(ia).value == b.target().params().block(ib).value;
    }
    if (!same) first_diff = step;
  }
  return {first_diff < 0, first_diff < 0
                              ? fmt("%zu shared blocks bitwise equal after each of 1000 steps", pairs.size())
                              : fmt("trajectories diverge at step %d", first_diff)};
}

// ---- 5 ----
Outcome ocad_correspondence() {
  double dev = 0.0;
  for (int i = 0; i < 12; ++i) {
    auto mdp = verify_instance(0, i);
    mdp.fixed_beta = 1.0;
    dev = std::max(dev, ocad::three_q_check(mdp).deviation());
  }
  const double target = critic_target_correspondence(200);
  return {dev < 1e-10 && target < 1e-12,
          fmt("three-Q deviation %.2e (tol 1e-10), critic target gap %.2e (tol 1e-12)", dev, target)};
}

// ---- 6 ----
struct BanditStats {
  double basin_fraction = 0.0;
  double mean_return = 0.0;
  double stderr_return = 0.0;
};

BanditStats bandit_runs(RunConfig cfg, int actors) {
  cfg.agent.actors = actors;
  std::vector<double> finals;
  int hits = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedRun run = train_seed(cfg, seed, {});
    finals.push_back(run.evals.back().mean_return);
    const auto& agent = *run.agent;
    envs::Env env(agent.env_spec());
    const Vector obs = env.reset(agent.eval_seed(0));
    const Vector act = agent.act_greedy(obs).action;
    const double dist = std::hypot(act[0] - envs::kGlobalCenter[0], act[1] - envs::kGlobalCenter[1]);
    hits += dist < 0.3 ? 1 : 0;
    std::cout << fmt("    N=%d seed %llu: final return %.3f, greedy action (%.2f, %.2f)\n", actors,
                     static_cast<unsigned long long>(seed), finals.back(), act[0], act[1]);
  }
  return {static_cast<double>(hits) / static_cast<double>(finals.size()), mean(finals), stderr_of(finals)};
}

Outcome ensemble_benefit() {
  const auto t0 = Clock::now();
  const RunConfig cfg = config_file("multimax.cfg");
  const BanditStats one = bandit_runs(cfg, 1);
  const BanditStats five = bandit_runs(cfg, 5);
  const double secs = seconds_since(t0);
  const bool pass = five.basin_fraction - one.basin_fraction >= 0.3 &&
                    five.mean_return - one.mean_return >= 0.1 && secs < 1800.0;
  return {pass, fmt("%zu seeds: basin fraction N=1 %.2f, N=5 %.2f; final return N=1 %.3f +- %.3f, "
                    "N=5 %.3f +- %.3f; %.0f s",
                    cfg.seeds.size(), one.basin_fraction, five.basin_fraction, one.mean_return,
                    one.stderr_return, five.mean_return, five.stderr_return, secs)};
}

// ---- 7 ----
std::vector<double> best_evals(RunConfig cfg, Variant v, int actors, int depth) {
  cfg.agent.variant = v;
  cfg.agent.actors = actors;
  cfg.agent.depth = depth;
  std::vector<double> best;
  for (std::uint64_t seed : cfg.seeds) {
    best.push_back(train_seed(cfg, seed, {}).best_mean);
    std::cout << fmt("    %s N=%d d=%d seed %llu: best eval %.3f\n", std::string(agents::variant_name(v)).c_str(),
                     actors, depth, static_cast<unsigned long long>(seed), best.back());
    std::cout.flush();
  }
  return best;
}

Outcome tree_search_benefit() {
  const RunConfig cfg = config_file("point-maze.cfg");
  const auto ace_best = best_evals(cfg, Variant::kAce, 5, 1);
  const auto ens_best = best_evals(cfg, Variant::kEnsembleDdpg, 5, 0);
  const double a = mean(ace_best), e = mean(ens_best);
  return {a >= e, fmt("%zu seeds: best eval ACE(N=5,d=1) %.3f +- %.3f vs Ensemble-DDPG(N=5) %.3f +- %.3f",
                      cfg.seeds.size(), a, stderr_of(ace_best), e, stderr_of(ens_best))};
}

// ---- 8 ----
Outcome tm_ace_sanity() {
  RunConfig cfg = config_file("point-maze.cfg");
  cfg.agent.variant = Variant::kTmAce;
  cfg.seeds.resize(5);
  const long window = 100;
  std::vector<double> ratios;
  bool finite = true;
  for (std::uint64_t seed : cfg.seeds) {
    double early = 0.0, late = 0.0;
    TrainHooks hooks;
    hooks.on_step = [&](const agents::Agent& agent, const agents::StepMetrics& m) {
      if (!std::isfinite(m.critic_loss) || !std::isfinite(m.actor_objective) || !std::isfinite(m.transition_loss)) {
        finite = false;
      }
      const long s = agent.steps();
      if (s > 1000 - window && s <= 1000) early += m.transition_loss;
      if (s > cfg.total_steps - window) late += m.transition_loss;
    };
    try {
      train_seed(cfg, seed, {}, hooks);
    } catch (const NumericError& e) {
      std::cout << "    seed " << seed << ": " << e.what() << "\n";
      finite = false;
      ratios.push_back(INFINITY);
      continue;
    }
    ratios.push_back(late / early);
    std::cout << fmt("    seed %llu: transition loss %.3e at 1k, %.3e at %ldk (ratio %.3f)\n",
                     static_cast<unsigned long long>(seed), early / window, late / window,
                     cfg.total_steps / 1000, ratios.back());
  }
  const double med = median(ratios);
  return {finite && med <= 0.5,
          fmt("median late/early transition loss %.3f (need <= 0.5), losses finite: %s", med,
              finite ? "yes" : "no")};
}

// ---- 9 ----
Outcome lqr_recovery() {
  const double k = lqr_gain();
  // Least-squares slope through the origin where the optimal action is unclipped.
  auto fitted_gain = [&](const agents::Agent& agent) {
    double num = 0.0, den = 0.0;
    for (int i = -40; i <= 40; ++i) {
      const double s = static_cast<double>(i) / 40.0;
      if (std::abs(k * s) > 1.0) continue;
      const double a = agent.act_greedy(Vector::Constant(1, s)).action[0];
      num += s * a;
      den += s * s;
    }
    return -num / den;
  };
  std::string detail;
  bool pass = true;
  for (const auto& [label, variant, n, d] :
       std::array{std::tuple{"ddpg", Variant::kDdpg, 1, 0}, std::tuple{"ace", Variant::kAce, 5, 1}}) {
    RunConfig cfg = config_file("lqr1d.cfg");
    cfg.agent.variant = variant;
    cfg.agent.actors = n;
    cfg.agent.depth = d;
    cfg.eval_interval = cfg.total_steps;
    std::vector<double> gains;
    for (std::uint64_t seed : cfg.seeds) {
      gains.push_back(fitted_gain(*train_seed(cfg, seed, {}).agent));
      std::cout << fmt("    %s seed %llu: fitted gain %.4f\n", label, static_cast<unsigned long long>(seed),
                       gains.back());
      std::cout.flush();
    }
    const double med = median(gains);
    const double rel = std::abs(med - k) / k;
    pass = pass && rel <= 0.15;
    detail += fmt("%s median gain %.4f (rel err %.3f); ", label, med, rel);
  }
  return {pass, detail + fmt("optimal k = %.6f, tol 15%%", k)};
}

// ---- 10 ----
Outcome throughput_ordering() {
  std::ostringstream log;
  const auto rows = run_bench(config_file("bench.cfg"), 3, 2000, log);
  std::cout << log.str();
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& r : rows) by_label[r.label].push_back(r.steps_per_second);
  std::string detail;
  for (const char* l : {"ddpg", "ace(1,5)", "ace(1,10)", "ace(2,5)"}) {
    detail += fmt("%s %.0f ", l, mean(by_label[l]));
  }
  return {bench_ordering_holds(rows), "mean steps/s: " + detail + "(3 repetitions)"};
}

// ---- 11 ----
std::string capture(const std::string& cmd, int* status) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) {
    *status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int st = ::pclose(p);
  *status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / ("ace-accept-" + std::to_string(::getpid()));
  fs::remove_all(base);
  const std::string bin = ACE_BIN;
  const std::string cfg = (fs::path(ACE_CONFIGS) / "smoke.cfg").string();
  std::vector<std::string> failures;
  std::map<std::string, std::string> outputs[2];
  for (int rep = 0; rep < 2; ++rep) {
    // Same output root both times: paths appear in the logs.
    const fs::path root = base / "work";
    fs::create_directories(root);
    const std::string env = "ACE_OUT=" + root.string() + " ";
    const std::string ckpt = (root / "smoke" / "seed-1" / "final.bin").string();
    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"train", env + bin + " train --config " + cfg},
        {"train-seed", env + bin + " train --config " + cfg + " --seed 7"},
        {"sweep", env + bin + " sweep --config " + cfg + " --N 1,2 --d 0,1"},
        {"eval", env + bin + " eval --ckpt " + ckpt + " --env lqr1d --episodes 5"},
        {"diversity", env + bin + " diversity --ckpt " + ckpt + " --env lqr1d --episodes 5"},
        {"verify", env + bin + " verify --instances 4"},
    };
    for (const auto& [name, cmd] : cmds) {
      int status = 0;
      outputs[rep]["stdout:" + name] = capture(cmd + " 2>/dev/null", &status);
      if (status != 0) failures.push_back(name + " exited " + std::to_string(status));
    }
    for (auto& [k, v] : tree_contents(root)) outputs[rep]["file:" + k] = std::move(v);
    fs::rename(root, base / ("r" + std::to_string(rep)));
  }
  std::size_t files = 0;
  for (const auto& [k, v] : outputs[0]) {
    if (k.rfind("file:", 0) == 0) ++files;
    const auto it = outputs[1].find(k);
    if (it == outputs[1].end() || it->second != v) failures.push_back("differs: " + k);
  }
  if (outputs[0].size() != outputs[1].size()) failures.push_back("different artifact sets");
  fs::remove_all(base);
  std::string detail = fmt("6 commands run twice, %zu files and all stdout compared", files);
  if (!failures.empty()) detail += "; first problem: " + failures.front();
  return {failures.empty() && files > 0, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "theorem verification", theorem_verification},
      {2, "gradient checks", gradient_checks},
      {3, "tree-search oracle", tree_oracle},
      {4, "reduction equivalence", reduction_equivalence},
      {5, "option correspondence", ocad_correspondence},
      {6, "ensemble benefit", ensemble_benefit},
      {7, "tree-search benefit", tree_search_benefit},
      {8, "tm-ace sanity", tm_ace_sanity},
      {9, "lqr recovery", lqr_recovery},
      {10, "throughput ordering", throughput_ordering},
      {11, "determinism", determinism},
  };
  bool ok = true;
  int ran = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c.id << " [" << c.name << "]: " << (out.pass ? "PASS" : "FAIL") << "  "
              << out.summary << std::endl;
    ok = ok && out.pass;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return ok ? 0 : 1;
}
