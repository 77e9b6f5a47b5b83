#include "ace/vpm/tree_search.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::vpm {

using num::NodeId;
using num::Tape;

namespace {

void check_depth(const AceNetwork& net, int depth) {
  if (depth < 0) throw ContractError("tree search depth must be non-negative");
  if (depth > 0 && !net.shape().has_model) {
    throw ContractError("tree search with depth > 0 needs reward and transition heads");
  }
}

Matrix tree_value_impl(const AceNetwork& net, const Matrix& z, const Matrix& a, int depth,
                       double gamma, TreeStats* stats, int level) {
  if (stats) {
    if (static_cast<int>(stats->value_calls.size()) <= level) {
      stats->value_calls.resize(static_cast<std::size_t>(level) + 1, 0);
    }
  }
  if (depth == 0) {
    if (stats) ++stats->value_calls[static_cast<std::size_t>(level)];
    return net.value(z, a);
  }
  const Matrix r = net.reward(z, a);
  const Matrix z_next = net.transition(z, a);
  if (stats) {
    ++stats->reward_calls;
    ++stats->transition_calls;
  }
  const std::vector<Matrix> proposals = net.act_all(z_next);
  std::vector<Matrix> values;
  values.reserve(proposals.size());
  for (const Matrix& p : proposals) {
    values.push_back(tree_value_impl(net, z_next, p, depth - 1, gamma, stats, level + 1));
  }
  Matrix best = values[0];
  for (std::size_t k = 1; k < values.size(); ++k) {
    for (Eigen::Index row = 0; row < best.rows(); ++row) {
      if (values[k](row, 0) > best(row, 0)) best(row, 0) = values[k](row, 0);
    }
  }
  return (r.array() + gamma * best.array()).matrix();
}

}  // namespace

NodeId tree_q(Tape& tape, AceNetwork& net, NodeId z, NodeId a, int depth, double gamma,
              TreeTrack track) {
  check_depth(net, depth);
  if (depth == 0) return net.value(tape, z, a, track.model);
  const NodeId r = net.reward(tape, z, a, track.model);
  const NodeId z_next = net.transition(tape, z, a, track.model);
  const std::vector<NodeId> proposals = net.act_all(tape, z_next, track.actors);
  std::vector<NodeId> values;
  values.reserve(proposals.size());
  for (NodeId p : proposals) {
    values.push_back(tree_q(tape, net, z_next, p, depth - 1, gamma, track));
  }
  const NodeId best = tape.max_select(values);
  return tape.add(r, tape.scale(best, gamma));
}

Matrix tree_value(const AceNetwork& net, const Matrix& z, const Matrix& a, int depth, double gamma,
                  TreeStats* stats) {
  check_depth(net, depth);
  return tree_value_impl(net, z, a, depth, gamma, stats, 0);
}

double eval_brute_tree(const AceNetwork& net, const Vector& z, const Vector& a, int depth,
                       double gamma) {
  check_depth(net, depth);
  const Matrix zr = z.transpose();
  const Matrix ar = a.transpose();
  if (depth == 0) return net.value(zr, ar)(0, 0);
  const double r = net.reward(zr, ar)(0, 0);
  const Matrix z_next = net.transition(zr, ar);
  double best = 0.0;
  for (int i = 0; i < net.shape().actors; ++i) {
    const Vector proposal = net.act(i, z_next).row(0).transpose();
    const double v = eval_brute_tree(net, z_next.row(0).transpose(), proposal, depth - 1, gamma);
    if (i == 0 || v > best) best = v;
  }
  return r + gamma * best;
}

std::vector<double> proposal_values(const AceNetwork& net, const Vector& obs, int depth,
                                    double gamma) {
  const Matrix o = obs.transpose();
  const Matrix z = net.encode(o);
  const std::vector<Matrix> proposals = net.act_all(net.policy_latent(o));
  std::vector<double> out;
  out.reserve(proposals.size());
  for (const Matrix& p : proposals) out.push_back(tree_value(net, z, p, depth, gamma)(0, 0));
  return out;
}

ActionChoice select_action(const AceNetwork& net, const Vector& obs, int depth, double gamma) {
  const Matrix o = obs.transpose();
  const Matrix z = net.encode(o);
  const std::vector<Matrix> proposals = net.act_all(net.policy_latent(o));
  ActionChoice best;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double v = tree_value(net, z, proposals[i], depth, gamma)(0, 0);
    if (!std::isfinite(v)) {
      throw NumericError("select_action: non-finite value for actor " + std::to_string(i));
    }
    if (i == 0 || v > best.value) {
      best.value = v;
      best.actor = static_cast<int>(i);
    }
  }
  best.action = proposals[static_cast<std::size_t>(best.actor)].row(0).transpose();
  return best;
}

}  // namespace ace::vpm
