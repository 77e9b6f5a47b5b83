#pragma once

#include <vector>

#include "ace/numcore/tape.hpp"
#include "ace/vpm/ace_network.hpp"

namespace ace::vpm {

/// Which parameters a taped tree search accumulates gradient into.
struct TreeTrack {
  bool model = false;   ///< reward, transition and value heads
  bool actors = false;  ///< actors proposing actions inside the tree
};

/// Counts value-head evaluations per tree level (level 0 is the root pair).
struct TreeStats {
  std::vector<long> value_calls;
  long reward_calls = 0;
  long transition_calls = 0;
};

/// Depth-d look-ahead estimate of Q(z, a), recorded on the tape:
///
///   q^0(z, a) = q(z, a)
///   q^d(z, a) = r(z, a) + gamma * max_i q^{d-1}(z', mu_i(z')),  z' = T(z, a)
///
/// The max is a hard row-wise argmax (ties to the lowest actor index) and
/// gradient reaches only the selected branch. Throws ContractError for
/// depth < 0, or depth > 0 on a network without model heads.
num::NodeId tree_q(num::Tape& tape, AceNetwork& net, num::NodeId z, num::NodeId a, int depth,
                   double gamma, TreeTrack track);

/// The same recursion evaluated without a tape. Serves as the oracle for
/// tree_q and as the fast path for targets and action selection; equal to
/// tree_q bit for bit on equal inputs.
Matrix tree_value(const AceNetwork& net, const Matrix& z, const Matrix& a, int depth, double gamma,
                  TreeStats* stats = nullptr);

/// Reference evaluator for a single (z, a): scalar recursion over actors
/// one at a time, no tape, no batching. Used to check tree_q.
double eval_brute_tree(const AceNetwork& net, const Vector& z, const Vector& a, int depth,
                       double gamma);

struct ActionChoice {
  Vector action;
  int actor = 0;
  double value = 0.0;
};

/// Scores every actor's proposal at the root with tree_value and returns the
/// best (lowest index on ties). No exploration noise. Throws NumericError if
/// any score is non-finite.
ActionChoice select_action(const AceNetwork& net, const Vector& obs, int depth, double gamma);

/// Root scores of every actor's proposal for one observation.
std::vector<double> proposal_values(const AceNetwork& net, const Vector& obs, int depth,
                                    double gamma);

}  // namespace ace::vpm
