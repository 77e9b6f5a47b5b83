#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ace/agents/agent.hpp"
#include "ace/harness/run_config.hpp"
#include "ace/numcore/checkpoint.hpp"

namespace ace::harness {

namespace fs = std::filesystem;

struct TrainHooks {
  /// Called after every training step.
  std::function<void(const agents::Agent&, const agents::StepMetrics&)> on_step;
  /// Called after every evaluation.
  std::function<void(const agents::Agent&, const agents::EvalRecord&)> on_eval;
};

struct SeedRun {
  std::uint64_t seed = 0;
  fs::path dir;  ///< empty when nothing was written
  std::vector<agents::EvalRecord> evals;
  double best_mean = 0.0;
  long best_step = 0;
  std::unique_ptr<agents::Agent> agent;  ///< final state
};

/// Trains one seed for config.total_steps, evaluating every eval_interval
/// steps. With a non-empty `dir`, writes curve.csv (appended and flushed per
/// evaluation), best.txt, config.cfg and checkpoints ckpt-<step>.bin every
/// checkpoint_interval steps plus final.bin. NumericError propagates.
SeedRun train_seed(const RunConfig& config, std::uint64_t seed, const fs::path& dir,
                   const TrainHooks& hooks = {});

/// <root>/<name>/seed-<k> for every seed (or only `seed` when given).
std::vector<SeedRun> run_train(const RunConfig& config, std::optional<std::uint64_t> seed,
                               std::ostream& log);

/// curve.csv text for a list of evaluations.
std::string curve_header();
std::string curve_row(const agents::EvalRecord& rec);

struct CurveRow {
  long step = 0;
  std::uint64_t seed = 0;
  std::string variant;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  int episodes = 0;
};
/// Throws ConfigError on a malformed file.
std::vector<CurveRow> read_curve(const fs::path& path);

struct SweepRow {
  int actors = 0;
  int depth = 0;
  std::uint64_t seed = 0;
  double best_mean = 0.0;
  bool operator==(const SweepRow&) const = default;
};

/// One run per (N, d, seed) under <root>/<name>/N<N>-d<d>/seed-<k>, then
/// summary.csv (N,d,seed,best_mean) in <root>/<name>. Throws ConfigError on
/// empty lists.
std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<int>& actors,
                                const std::vector<int>& depths, std::ostream& log);
/// Recomputes summary rows from the curve files of a sweep directory.
std::vector<SweepRow> summarize_sweep(const fs::path& sweep_dir);
std::vector<SweepRow> read_summary(const fs::path& path);

struct BenchRow {
  std::string label;
  int repetition = 0;
  double steps_per_second = 0.0;
};

/// Env steps per second of ddpg, ace(1,5), ace(1,10), ace(2,5) on the
/// config's environment over `window` timed steps after a warm-up of one
/// batch; repeated `repetitions` times.
std::vector<BenchRow> run_bench(const RunConfig& config, int repetitions, long window,
                                std::ostream& log);
/// True if every repetition has ddpg > ace(1,5) > ace(1,10) > ace(2,5).
bool bench_ordering_holds(const std::vector<BenchRow>& rows);

/// Checkpoint of an agent's online network.
void save_agent(const fs::path& path, const agents::Agent& agent);

/// A network restored from a checkpoint with its planning settings.
struct LoadedPolicy {
  agents::Variant variant = agents::Variant::kAce;
  int depth = 0;
  double gamma = 0.99;
  std::unique_ptr<vpm::AceNetwork> net;
};
/// Throws ConfigError when the checkpoint does not fit the environment.
LoadedPolicy load_policy(const fs::path& path, const envs::EnvSpec& env);

struct DiversityRow {
  int actor = 0;
  double mean = 0.0;
  double stderr_return = 0.0;
};
/// Each actor alone over `episodes` deterministic episodes.
std::vector<DiversityRow> run_diversity(const LoadedPolicy& policy, const envs::EnvSpec& env,
                                        int episodes, std::uint64_t seed);
/// Greedy vote of all actors over `episodes` deterministic episodes.
agents::EvalRecord run_eval(const LoadedPolicy& policy, const envs::EnvSpec& env, int episodes,
                            std::uint64_t seed);

}  // namespace ace::harness
