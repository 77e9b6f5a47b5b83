#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ace/agents/losses.hpp"
#include "ace/numcore/grad_check.hpp"
#include "ace/ocad/option_mdp.hpp"
#include "ace/vpm/ace_network.hpp"

namespace ace::harness {

/// A small random network with a batch, for gradient and oracle checks.
struct GradCase {
  vpm::NetworkShape shape;
  std::unique_ptr<vpm::AceNetwork> net;
  agents::Batch batch;
  Matrix targets;  ///< B x 1 critic targets
};

/// Builds case `seed` for ensemble size N and depth d. Batches hold 4 rows.
GradCase make_grad_case(std::uint64_t seed, int actors, int depth);

struct GradSuiteResult {
  double max_error = 0.0;  ///< max relative error over all kept cases
  int cases = 0;           ///< cases checked
  int excluded_ties = 0;   ///< draws rejected for a near-tie argmax
};

/// Which scalar to check.
enum class GradTarget { kCriticLoss, kActorObjective, kTreeQ };
std::string grad_target_name(GradTarget t);

/// Finite-difference check (h = 1e-5) of `target` on `seeds` cases of
/// (N, d). Cases whose tree search has an argmax margin below 1e-4 are
/// redrawn and counted as excluded. Variant selects the loss flavour.
GradSuiteResult grad_suite(GradTarget target, agents::Variant variant, int actors, int depth,
                           int seeds, std::uint64_t root_seed = 0);

/// max over `cases` random (net, z, a, d <= 3, N <= 5) of |tree_q - brute|
/// and of |tree_q(d=0) - f_q|; both are exactly 0 when bitwise equal.
struct TreeOracleResult {
  int cases = 0;
  int mismatches = 0;
  double max_abs_diff = 0.0;
  int depth0_mismatches = 0;
};
TreeOracleResult tree_oracle_suite(int cases, std::uint64_t root_seed = 0);

/// max |agents critic target - option-form target with beta = 1| over
/// random synthetic networks and batches, for d = 0 and d = 1.
double critic_target_correspondence(int cases, std::uint64_t root_seed = 0);

struct VerifyCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int instances = 12;
  std::uint64_t seed = 0;
  /// Test hook: negate the intra-option gradient before comparing.
  bool flip_dipg_sign = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

/// Theorem checks on random option MDPs, gradient checks, tree-oracle
/// equivalence and the critic-target correspondence.
VerifyReport run_verify(const VerifyOptions& options);
void print_report(std::ostream& out, const VerifyReport& report);

/// Relative error used by the theorem checks: |a - n| / max(|n|, 1e-6).
double theorem_error(double analytic, double numeric);

/// Max theorem_error of both gradients against central differences of the
/// objective (h = 1e-6) on one instance.
struct TheoremErrors {
  double dipg = 0.0;
  double termination = 0.0;
};
TheoremErrors theorem_errors(const ocad::TabularOptionMdp& mdp, bool flip_dipg_sign = false);

/// Random instance `index` of the verification family (2-6 states, 1-3
/// options).
ocad::TabularOptionMdp verify_instance(std::uint64_t seed, int index);

}  // namespace ace::harness
