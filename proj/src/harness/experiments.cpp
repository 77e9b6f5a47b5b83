#include "ace/harness/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "ace/errors.hpp"

namespace ace::harness {

using agents::Agent;
using agents::EvalRecord;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const fs::path& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(where.string() + ": bad number '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const fs::path& where) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(where.string() + ": bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

}  // namespace

std::string curve_header() { return "step,seed,variant,mean_return,stderr,episodes\n"; }

std::string curve_row(const EvalRecord& rec) {
  return std::to_string(rec.step) + "," + std::to_string(rec.seed) + "," + rec.variant + "," +
         fmt(rec.mean_return) + "," + fmt(rec.stderr_return) + "," +
         std::to_string(rec.returns.size()) + "\n";
}

std::vector<CurveRow> read_curve(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line + "\n" != curve_header()) {
    throw ConfigError(path.string() + ": missing curve header");
  }
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw ConfigError(path.string() + ": bad row '" + line + "'");
    CurveRow r;
    r.step = parse_long(f[0], path);
    r.seed = static_cast<std::uint64_t>(parse_long(f[1], path));
    r.variant = f[2];
    r.mean_return = parse_double(f[3], path);
    r.stderr_return = parse_double(f[4], path);
    r.episodes = static_cast<int>(parse_long(f[5], path));
    rows.push_back(r);
  }
  return rows;
}

void save_agent(const fs::path& path, const Agent& agent) {
  const auto& shape = agent.online().shape();
  num::CheckpointHeader h;
  h.variant = std::string(agents::variant_name(agent.config().variant));
  h.actors = shape.actors;
  h.depth = agent.config().depth;
  h.dims = {static_cast<double>(shape.obs_dim), static_cast<double>(shape.act_dim),
            static_cast<double>(shape.latent), static_cast<double>(shape.hidden),
            agent.config().gamma};
  num::save_checkpoint(path, h, agent.online().params());
}

LoadedPolicy load_policy(const fs::path& path, const envs::EnvSpec& env) {
  num::Checkpoint ck = num::load_checkpoint(path);
  const auto& h = ck.header;
  if (h.dims.size() != 5) throw ConfigError(path.string() + ": expected 5 header dims");
  LoadedPolicy p;
  p.variant = agents::parse_variant(h.variant);
  p.depth = h.depth;
  p.gamma = h.dims[4];
  vpm::NetworkShape shape;
  shape.obs_dim = static_cast<int>(h.dims[0]);
  shape.act_dim = static_cast<int>(h.dims[1]);
  shape.latent = static_cast<int>(h.dims[2]);
  shape.hidden = static_cast<int>(h.dims[3]);
  shape.actors = h.actors;
  shape.separate_actor_encoder =
      p.variant == agents::Variant::kDdpg || p.variant == agents::Variant::kWideDdpg;
  shape.has_model = p.variant == agents::Variant::kAce || p.variant == agents::Variant::kAceAlt ||
                    p.variant == agents::Variant::kTmAce;
  if (shape.obs_dim != env.obs_dim || shape.act_dim != env.act_dim) {
    throw ConfigError(path.string() + ": checkpoint dimensions do not match env " + env.name);
  }
  try {
    p.net = std::make_unique<vpm::AceNetwork>(shape, std::move(ck.params));
  } catch (const DimensionError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return p;
}

SeedRun train_seed(const RunConfig& config, std::uint64_t seed, const fs::path& dir,
                   const TrainHooks& hooks) {
  config.validate();
  RunConfig c = config;
  c.seeds = {seed};
  c.agent.seed = seed;
  const envs::EnvSpec spec = envs::make_spec(c.env);

  SeedRun run;
  run.seed = seed;
  run.dir = dir;
  run.agent = std::make_unique<Agent>(c.agent, spec);
  Agent& agent = *run.agent;
  envs::Env env(spec);

  std::ofstream curve;
  if (!dir.empty()) {
    fs::create_directories(dir);
    write_text(dir / "config.cfg", serialize(c));
    curve.open(dir / "curve.csv", std::ios::binary | std::ios::trunc);
    if (!curve) throw ConfigError("cannot write " + (dir / "curve.csv").string());
    curve << curve_header() << std::flush;
  }

  const auto start = std::chrono::steady_clock::now();
  bool have_best = false;
  for (long step = 1; step <= c.total_steps; ++step) {
    const agents::StepMetrics m = agent.train_step(env);
    if (hooks.on_step) hooks.on_step(agent, m);
    if (step % c.eval_interval == 0 || step == c.total_steps) {
      EvalRecord rec = agent.evaluate(c.eval_episodes);
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (!have_best || rec.mean_return > run.best_mean) {
        have_best = true;
        run.best_mean = rec.mean_return;
        run.best_step = rec.step;
      }
      if (curve.is_open()) curve << curve_row(rec) << std::flush;
      if (hooks.on_eval) hooks.on_eval(agent, rec);
      run.evals.push_back(std::move(rec));
    }
    if (!dir.empty() && step % c.checkpoint_interval == 0) {
      save_agent(dir / ("ckpt-" + std::to_string(step) + ".bin"), agent);
    }
  }
  if (!dir.empty()) {
    save_agent(dir / "final.bin", agent);
    write_text(dir / "best.txt", "best_mean_return " + fmt(run.best_mean) + "\nstep " +
                                     std::to_string(run.best_step) + "\n");
  }
  return run;
}

std::vector<SeedRun> run_train(const RunConfig& config, std::optional<std::uint64_t> seed,
                               std::ostream& log) {
  config.validate();
  const std::vector<std::uint64_t> seeds = seed ? std::vector<std::uint64_t>{*seed} : config.seeds;
  const fs::path base = output_root(config) / config.name;
  std::vector<SeedRun> runs;
  for (const std::uint64_t s : seeds) {
    SeedRun r = train_seed(config, s, base / ("seed-" + std::to_string(s)));
    log << "seed " << s << ": best " << fmt(r.best_mean) << " at step " << r.best_step << " -> "
        << r.dir.string() << "\n";
    r.agent.reset();
    runs.push_back(std::move(r));
  }
  return runs;
}

namespace {

void sort_rows(std::vector<SweepRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.actors, a.depth, a.seed) < std::tie(b.actors, b.depth, b.seed);
  });
}

std::string summary_text(const std::vector<SweepRow>& rows) {
  std::string out = "N,d,seed,best_mean\n";
  for (const auto& r : rows) {
    out += std::to_string(r.actors) + "," + std::to_string(r.depth) + "," + std::to_string(r.seed) +
           "," + fmt(r.best_mean) + "\n";
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<int>& actors,
                                const std::vector<int>& depths, std::ostream& log) {
  if (actors.empty() || depths.empty()) throw ConfigError("sweep: N and d lists must be non-empty");
  config.validate();
  // Validate every cell before the first run starts.
  for (const int n : actors) {
    for (const int d : depths) {
      RunConfig cell = config;
      cell.agent.actors = n;
      cell.agent.depth = d;
      cell.validate();
    }
  }
  const fs::path base = output_root(config) / config.name;
  fs::create_directories(base);
  std::vector<SweepRow> rows;
  for (const int n : actors) {
    for (const int d : depths) {
      RunConfig cell = config;
      cell.agent.actors = n;
      cell.agent.depth = d;
      const fs::path cell_dir = base / ("N" + std::to_string(n) + "-d" + std::to_string(d));
      for (const std::uint64_t s : config.seeds) {
        SeedRun r = train_seed(cell, s, cell_dir / ("seed-" + std::to_string(s)));
        log << "N=" << n << " d=" << d << " seed " << s << ": best " << fmt(r.best_mean) << "\n";
        rows.push_back({n, d, s, r.best_mean});
      }
    }
  }
  sort_rows(rows);
  write_text(base / "summary.csv", summary_text(rows));
  return rows;
}

std::vector<SweepRow> summarize_sweep(const fs::path& sweep_dir) {
  static const std::regex cell_re(R"(N(\d+)-d(\d+))");
  static const std::regex seed_re(R"(seed-(\d+))");
  std::vector<SweepRow> rows;
  for (const auto& cell : fs::directory_iterator(sweep_dir)) {
    std::smatch m;
    const std::string cname = cell.path().filename().string();
    if (!cell.is_directory() || !std::regex_match(cname, m, cell_re)) continue;
    const int n = std::stoi(m[1]);
    const int d = std::stoi(m[2]);
    for (const auto& sd : fs::directory_iterator(cell.path())) {
      std::smatch sm;
      const std::string sname = sd.path().filename().string();
      if (!sd.is_directory() || !std::regex_match(sname, sm, seed_re)) continue;
      const auto curve = read_curve(sd.path() / "curve.csv");
      if (curve.empty()) throw ConfigError(sd.path().string() + ": empty curve");
      double best = curve.front().mean_return;
      for (const auto& r : curve) best = std::max(best, r.mean_return);
      rows.push_back({n, d, std::stoull(sm[1]), best});
    }
  }
  sort_rows(rows);
  return rows;
}

std::vector<SweepRow> read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "N,d,seed,best_mean") {
    throw ConfigError(path.string() + ": missing summary header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw ConfigError(path.string() + ": bad row '" + line + "'");
    rows.push_back({static_cast<int>(parse_long(f[0], path)), static_cast<int>(parse_long(f[1], path)),
                    static_cast<std::uint64_t>(parse_long(f[2], path)), parse_double(f[3], path)});
  }
  return rows;
}

namespace {
struct BenchCell {
  const char* label;
  agents::Variant variant;
  int actors;
  int depth;
};
constexpr BenchCell kBenchCells[] = {
    {"ddpg", agents::Variant::kDdpg, 1, 0},
    {"ace(1,5)", agents::Variant::kAce, 5, 1},
    {"ace(1,10)", agents::Variant::kAce, 10, 1},
    {"ace(2,5)", agents::Variant::kAce, 5, 2},
};
}  // namespace

std::vector<BenchRow> run_bench(const RunConfig& config, int repetitions, long window,
                                std::ostream& log) {
  if (repetitions < 1 || window < 1) throw ConfigError("bench: repetitions and window must be >= 1");
  config.validate();
  const envs::EnvSpec spec = envs::make_spec(config.env);
  std::vector<BenchRow> rows;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const BenchCell& cell : kBenchCells) {
      agents::AgentConfig ac = config.agent;
      ac.variant = cell.variant;
      ac.actors = cell.actors;
      ac.depth = cell.depth;
      ac.seed = config.seeds.front();
      Agent agent(ac, spec);
      envs::Env env(spec);
      for (int i = 0; i < ac.batch_size; ++i) agent.train_step(env);
      const auto t0 = std::chrono::steady_clock::now();
      for (long i = 0; i < window; ++i) agent.train_step(env);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      BenchRow row{cell.label, rep, static_cast<double>(window) / secs};
      log << "rep " << rep << "  " << row.label << "  " << row.steps_per_second << " steps/s\n";
      rows.push_back(row);
    }
  }
  return rows;
}

bool bench_ordering_holds(const std::vector<BenchRow>& rows) {
  std::map<int, std::vector<const BenchRow*>> by_rep;
  for (const auto& r : rows) by_rep[r.repetition].push_back(&r);
  if (by_rep.empty()) return false;
  for (const auto& [rep, list] : by_rep) {
    std::map<std::string, double> sps;
    for (const BenchRow* r : list) sps[r->label] = r->steps_per_second;
    for (std::size_t k = 0; k + 1 < std::size(kBenchCells); ++k) {
      const auto a = sps.find(kBenchCells[k].label);
      const auto b = sps.find(kBenchCells[k + 1].label);
      if (a == sps.end() || b == sps.end() || !(a->second > b->second)) return false;
    }
  }
  return true;
}

std::vector<DiversityRow> run_diversity(const LoadedPolicy& policy, const envs::EnvSpec& env,
                                        int episodes, std::uint64_t seed) {
  const vpm::AceNetwork& net = *policy.net;
  std::vector<DiversityRow> rows;
  for (int i = 0; i < net.shape().actors; ++i) {
    const EvalRecord rec =
        agents::run_policy_episodes(env, episodes, seed, [&net, i](const Vector& obs) -> Vector {
          const Matrix o = obs.transpose();
          return net.act(i, net.policy_latent(o)).row(0).transpose();
        });
    rows.push_back({i, rec.mean_return, rec.stderr_return});
  }
  return rows;
}

EvalRecord run_eval(const LoadedPolicy& policy, const envs::EnvSpec& env, int episodes,
                    std::uint64_t seed) {
  const vpm::AceNetwork& net = *policy.net;
  EvalRecord rec = agents::run_policy_episodes(env, episodes, seed, [&](const Vector& obs) {
    return vpm::select_action(net, obs, policy.depth, policy.gamma).action;
  });
  rec.variant = std::string(agents::variant_name(policy.variant));
  return rec;
}

}  // namespace ace::harness
