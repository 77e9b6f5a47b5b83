#include "ace/harness/checks.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "ace/errors.hpp"
#include "ace/ocad/option_critic.hpp"
#include "ace/rng.hpp"
#include "ace/vpm/tree_search.hpp"

namespace ace::harness {

using agents::LossSpec;
using agents::Variant;
using num::NodeId;
using num::Tape;

namespace {

constexpr double kGamma = 0.9;
constexpr double kNetFdStep = 1e-5;
constexpr double kTheoremFdStep = 1e-6;
constexpr double kTieMargin = 1e-4;
constexpr int kMaxRedraws = 50;

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

vpm::NetworkShape small_shape(int actors) {
  vpm::NetworkShape s;
  s.obs_dim = 3;
  s.act_dim = 2;
  s.latent = 6;
  s.hidden = 5;
  s.actors = actors;
  return s;
}

}  // namespace

GradCase make_grad_case(std::uint64_t seed, int actors, int depth) {
  (void)depth;
  GradCase c;
  c.shape = small_shape(actors);
  c.net = std::make_unique<vpm::AceNetwork>(c.shape, derive_seed(seed, "gradcase"),
                                            vpm::InitOptions{.output_range = 0.5, .actor_bias_range = 0.5});
  Rng rng(derive_seed(seed, "gradbatch"));
  const int b = 4;
  c.batch.s = random_matrix(rng, b, c.shape.obs_dim, -1.0, 1.0);
  c.batch.a = random_matrix(rng, b, c.shape.act_dim, -1.0, 1.0);
  c.batch.r = random_matrix(rng, b, 1, -1.0, 1.0);
  c.batch.s_next = random_matrix(rng, b, c.shape.obs_dim, -1.0, 1.0);
  c.batch.terminal = {0, 0, 0, 1};
  for (int i = 0; i < b; ++i) c.batch.actor.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(actors))));
  c.targets = random_matrix(rng, b, 1, -1.0, 1.0);
  return c;
}

std::string grad_target_name(GradTarget t) {
  switch (t) {
    case GradTarget::kCriticLoss: return "critic_loss";
    case GradTarget::kActorObjective: return "actor_objective";
    case GradTarget::kTreeQ: return "tree_q";
  }
  return "?";
}

GradSuiteResult grad_suite(GradTarget target, Variant variant, int actors, int depth, int seeds,
                           std::uint64_t root_seed) {
  GradSuiteResult out;
  const LossSpec spec{variant, depth, kGamma};
  for (int k = 0; k < seeds; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxRedraws) throw SolverError("grad_suite: could not draw a tie-free case");
      const std::uint64_t seed =
          derive_seed(derive_seed(root_seed, "gradsuite", static_cast<std::uint64_t>(k)), "attempt",
                      static_cast<std::uint64_t>(attempt));
      GradCase c = make_grad_case(seed, actors, depth);
      vpm::AceNetwork& net = *c.net;
      vpm::AceNetwork critic_copy = net;

      num::TapedScalar f;
      std::vector<int> blocks;
      switch (target) {
        case GradTarget::kCriticLoss:
          f = [&](Tape& t) { return agents::build_critic_loss(t, net, c.batch, c.targets, spec).total; };
          blocks = net.critic_blocks();
          break;
        case GradTarget::kActorObjective:
          f = [&](Tape& t) { return agents::build_actor_objective(t, net, critic_copy, c.batch, spec); };
          blocks = net.actor_blocks();
          break;
        case GradTarget::kTreeQ:
          f = [&](Tape& t) {
            const NodeId z = net.encode(t, t.constant(c.batch.s), true);
            const NodeId q = vpm::tree_q(t, net, z, t.constant(c.batch.a), depth, kGamma,
                                         vpm::TreeTrack{.model = true, .actors = true});
            return t.sum(q);
          };
          break;
      }
      Tape probe;
      f(probe);
      if (probe.min_select_margin() < kTieMargin) {
        ++out.excluded_ties;
        continue;
      }
      const num::GradCheckResult r = num::grad_check(f, net.params(), kNetFdStep, blocks);
      out.max_error = std::max(out.max_error, r.max_relative_error);
      ++out.cases;
      break;
    }
  }
  return out;
}

TreeOracleResult tree_oracle_suite(int cases, std::uint64_t root_seed) {
  TreeOracleResult out;
  for (int k = 0; k < cases; ++k) {
    Rng rng(derive_seed(root_seed, "treeoracle", static_cast<std::uint64_t>(k)));
    const int actors = 1 + static_cast<int>(rng.index(5));
    const int depth = static_cast<int>(rng.index(4));
    vpm::NetworkShape shape = small_shape(actors);
    shape.latent = 8;
    shape.hidden = 6;
    vpm::AceNetwork net(shape, rng.next_u64(), vpm::InitOptions{.output_range = 0.5, .actor_bias_range = 0.5});
    const Matrix z = random_matrix(rng, 1, shape.latent, -1.0, 1.0);
    const Matrix a = random_matrix(rng, 1, shape.act_dim, -1.0, 1.0);

    Tape tape;
    const NodeId q = vpm::tree_q(tape, net, tape.constant(z), tape.constant(a), depth, kGamma, {});
    const double taped = tape.value(q)(0, 0);
    const double brute = vpm::eval_brute_tree(net, z.row(0).transpose(), a.row(0).transpose(), depth, kGamma);
    ++out.cases;
    if (!(taped == brute)) {
      ++out.mismatches;
      out.max_abs_diff = std::max(out.max_abs_diff, std::abs(taped - brute));
    }
    Tape t0;
    const double q0 = t0.value(vpm::tree_q(t0, net, t0.constant(z), t0.constant(a), 0, kGamma, {}))(0, 0);
    if (!(q0 == net.value(z, a)(0, 0))) ++out.depth0_mismatches;
  }
  return out;
}

double critic_target_correspondence(int cases, std::uint64_t root_seed) {
  double worst = 0.0;
  for (int k = 0; k < cases; ++k) {
    const std::uint64_t seed = derive_seed(root_seed, "correspondence", static_cast<std::uint64_t>(k));
    GradCase c = make_grad_case(seed, 3, 1);
    c.batch.terminal.assign(c.batch.terminal.size(), 0);
    const vpm::AceNetwork& net = *c.net;
    for (const int depth : {0, 1}) {
      const LossSpec spec{depth == 0 ? Variant::kEnsembleDdpg : Variant::kAce, depth, kGamma};
      const Matrix y = agents::ensemble_targets(net, c.batch, spec);
      for (Eigen::Index i = 0; i < c.batch.size(); ++i) {
        const Matrix s_next = c.batch.s_next.row(i);
        const Vector z = net.encode(s_next).row(0).transpose();
        const Matrix zp = net.policy_latent(s_next);
        std::vector<double> q;
        for (int w = 0; w < net.shape().actors; ++w) {
          q.push_back(vpm::eval_brute_tree(net, z, net.act(w, zp).row(0).transpose(), depth, kGamma));
        }
        // With beta = 1 the option the agent arrived with is irrelevant.
        for (int w = 0; w < net.shape().actors; ++w) {
          const double g = ocad::option_target(c.batch.r(i, 0), kGamma, 1.0, q[static_cast<std::size_t>(w)], q);
          worst = std::max(worst, std::abs(g - y(i, 0)));
        }
      }
    }
  }
  return worst;
}

double theorem_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-6);
}

TheoremErrors theorem_errors(const ocad::TabularOptionMdp& mdp, bool flip_dipg_sign) {
  const ocad::OptionValues values = ocad::solve_values(mdp);
  Matrix dipg = ocad::dipg_gradient(mdp, values);
  if (flip_dipg_sign) dipg = -dipg;
  const Matrix term = ocad::termination_gradient(mdp, values);
  TheoremErrors e;
  for (int w = 0; w < mdp.options; ++w) {
    for (int s = 0; s < mdp.states; ++s) {
      ocad::TabularOptionMdp up = mdp;
      ocad::TabularOptionMdp down = mdp;
      up.theta(w, s) += kTheoremFdStep;
      down.theta(w, s) -= kTheoremFdStep;
      double fd = (ocad::objective(up) - ocad::objective(down)) / (2.0 * kTheoremFdStep);
      e.dipg = std::max(e.dipg, theorem_error(dipg(w, s), fd));
      up = mdp;
      down = mdp;
      up.nu(w, s) += kTheoremFdStep;
      down.nu(w, s) -= kTheoremFdStep;
      fd = (ocad::objective(up) - ocad::objective(down)) / (2.0 * kTheoremFdStep);
      e.termination = std::max(e.termination, theorem_error(term(w, s), fd));
    }
  }
  return e;
}

ocad::TabularOptionMdp verify_instance(std::uint64_t seed, int index) {
  return ocad::random_option_mdp(derive_seed(seed, "verify", static_cast<std::uint64_t>(index)),
                                 2 + index % 5, 2 + index % 2);
}

bool VerifyReport::passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return !checks.empty();
}

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;
  auto add = [&](std::string name, double err, double tol) {
    rep.checks.push_back({std::move(name), err, tol, err < tol});
  };
  for (int i = 0; i < opt.instances; ++i) {
    const ocad::TabularOptionMdp mdp = verify_instance(opt.seed, i);
    const std::string tag = "[" + std::to_string(i) + "]";
    const TheoremErrors e = theorem_errors(mdp, opt.flip_dipg_sign);
    add("dipg" + tag, e.dipg, 1e-5);
    add("termination" + tag, e.termination, 1e-5);
    const ocad::OptionValues v = ocad::solve_values(mdp);
    add("value-residual" + tag, v.residual, 1e-12);
    add("occupancy-series" + tag,
        (ocad::occupancy(mdp) - ocad::occupancy_series(mdp, 10000)).cwiseAbs().maxCoeff(), 1e-10);
    ocad::TabularOptionMdp always = mdp;
    always.fixed_beta = 1.0;
    add("three-q" + tag, ocad::three_q_check(always).deviation(), 1e-10);
  }
  add("critic-target", critic_target_correspondence(20, opt.seed), 1e-12);
  const TreeOracleResult tree = tree_oracle_suite(200, opt.seed);
  rep.checks.push_back({"tree-oracle", tree.max_abs_diff, 0.0,
                        tree.mismatches == 0 && tree.depth0_mismatches == 0});
  for (const GradTarget t : {GradTarget::kCriticLoss, GradTarget::kActorObjective, GradTarget::kTreeQ}) {
    for (const int n : {1, 2, 5}) {
      for (const int d : {0, 1, 2}) {
        const GradSuiteResult g = grad_suite(t, Variant::kAce, n, d, 2, opt.seed);
        add("grad " + grad_target_name(t) + " N=" + std::to_string(n) + " d=" + std::to_string(d),
            g.max_error, 1e-4);
      }
    }
  }
  return rep;
}

void print_report(std::ostream& out, const VerifyReport& rep) {
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %12s %10s  %s\n", "check", "max_error", "tolerance", "result");
  out << line;
  int passed = 0;
  for (const auto& c : rep.checks) {
    std::snprintf(line, sizeof line, "%-32s %12.3e %10.0e  %s\n", c.name.c_str(), c.max_error,
                  c.tolerance, c.pass ? "PASS" : "FAIL");
    out << line;
    passed += c.pass ? 1 : 0;
  }
  out << "verify: " << passed << "/" << rep.checks.size() << " checks passed\n";
}

}  // namespace ace::harness
