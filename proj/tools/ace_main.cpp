// ace: command line front end for training, sweeps, verification and
// benchmarking.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "ace/errors.hpp"
#include "ace/harness/checks.hpp"
#include "ace/harness/experiments.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericAbort = 3 };

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ace::ConfigError(std::string("bad ") + what + " list '" + text + "'");
    }
  }
  if (out.empty()) throw ace::ConfigError(std::string("empty ") + what + " list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ace::harness;
  CLI::App app{"ace: actor-ensemble training and verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "train every seed of a config");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--seed", seed, "train only this seed");

  std::string n_list = "1,5,10";
  std::string d_list = "0,1,2";
  auto* sweep = app.add_subcommand("sweep", "grid of runs over ensemble size and depth");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--N", n_list, "comma-separated ensemble sizes");
  sweep->add_option("--d", d_list, "comma-separated planning depths");

  int instances = 12;
  auto* verify = app.add_subcommand("verify", "theorem, gradient and oracle checks");
  verify->add_option("--instances", instances, "random option MDPs to check");
  bool flip_sign = false;
  verify->add_flag("--flip-dipg-sign", flip_sign, "negate the analytic gradient (self-test)")->group("");

  int reps = 3;
  long window = 2000;
  auto* bench = app.add_subcommand("bench", "env steps per second of ddpg and ace settings");
  bench->add_option("--config", config_path, "config file")->required();
  bench->add_option("--reps", reps, "repetitions");
  bench->add_option("--window", window, "timed steps per measurement");

  std::string ckpt;
  std::string env_name;
  int episodes = 20;
  std::uint64_t eval_seed = 0;
  auto* diversity = app.add_subcommand("diversity", "evaluate each actor of a checkpoint alone");
  diversity->add_option("--ckpt", ckpt, "checkpoint file")->required();
  diversity->add_option("--env", env_name, "environment")->required();
  diversity->add_option("--episodes", episodes, "episodes per actor");
  diversity->add_option("--seed", eval_seed, "evaluation seed");

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--env", env_name, "environment")->required();
  eval->add_option("--episodes", episodes, "episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) {
      run_train(load_run_config(config_path), seed, std::cout);
    } else if (*sweep) {
      const auto cfg = load_run_config(config_path);
      const auto rows =
          run_sweep(cfg, parse_int_list(n_list, "N"), parse_int_list(d_list, "d"), std::cout);
      std::cout << "N,d,seed,best_mean\n";
      for (const auto& r : rows) {
        std::cout << r.actors << "," << r.depth << "," << r.seed << "," << r.best_mean << "\n";
      }
    } else if (*verify) {
      VerifyOptions opt;
      opt.instances = instances;
      opt.flip_dipg_sign = flip_sign;
      const VerifyReport rep = run_verify(opt);
      print_report(std::cout, rep);
      return rep.passed() ? kOk : kVerifyFailed;
    } else if (*bench) {
      const auto rows = run_bench(load_run_config(config_path), reps, window, std::cout);
      const bool ok = bench_ordering_holds(rows);
      std::cout << "ordering ddpg > ace(1,5) > ace(1,10) > ace(2,5): " << (ok ? "holds" : "violated")
                << "\n";
    } else if (*diversity || *eval) {
      const auto spec = ace::envs::make_spec(env_name);
      const LoadedPolicy policy = load_policy(ckpt, spec);
      char line[128];
      if (*diversity) {
        if (policy.net->shape().actors < 2) {
          std::cerr << "warning: checkpoint has a single actor\n";
        }
        std::cout << "actor,mean,stderr\n";
        for (const auto& r : run_diversity(policy, spec, episodes, eval_seed)) {
          std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", r.actor, r.mean, r.stderr_return);
          std::cout << line;
        }
      } else {
        const auto rec = run_eval(policy, spec, episodes, eval_seed);
        std::cout << "episode,return\n";
        for (std::size_t e = 0; e < rec.returns.size(); ++e) {
          std::snprintf(line, sizeof line, "%zu,%.6f\n", e, rec.returns[e]);
          std::cout << line;
        }
        std::snprintf(line, sizeof line, "mean %.6f stderr %.6f over %zu episodes\n", rec.mean_return,
                      rec.stderr_return, rec.returns.size());
        std::cout << line;
      }
    }
  } catch (const ace::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ace::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ace::NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kNumericAbort;
  }
  return kOk;
}
