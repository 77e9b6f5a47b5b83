#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ace/numcore/param_store.hpp"
#include "ace/numcore/types.hpp"

namespace ace::num {

/// Handle to a value recorded on a Tape.
struct NodeId {
  int index = -1;
  bool valid() const { return index >= 0; }
  friend bool operator==(NodeId, NodeId) = default;
};

enum class OpKind : std::uint8_t {
  kConstant,
  kAffine,
  kTanh,
  kAdd,
  kConcat,
  kSlice,
  kSquare,
  kSum,
  kScale,
  kSelectRows,
};

/// Records a forward computation over batch-major matrices and replays it in
/// reverse to accumulate parameter gradients.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order. Gradients reach a ParamStore only through affine nodes
/// whose ParamRef has `track` set; untracked parameters behave as constants.
/// Nodes that depend on neither a tracked parameter nor a differentiable
/// input carry no gradient and are skipped during backward.
class Tape {
 public:
  /// A leaf with no gradient.
  NodeId constant(Matrix value);
  /// A leaf that still receives gradient, for inspecting d(seed)/d(input).
  NodeId input(Matrix value);

  /// x * W^T + b. Throws DimensionError on mismatch, NumericError on a
  /// non-finite input.
  NodeId affine(NodeId x, ParamRef weight, ParamRef bias);
  NodeId tanh(NodeId x);
  NodeId add(NodeId a, NodeId b);
  /// Column concatenation [a | b].
  NodeId concat(NodeId a, NodeId b);
  /// Columns [offset, offset + width).
  NodeId slice(NodeId x, Eigen::Index offset, Eigen::Index width);
  NodeId square(NodeId x);
  /// Sum of every entry, as a 1x1 node.
  NodeId sum(NodeId x);
  NodeId scale(NodeId x, double factor);

  /// Row-wise pick: output row b is row b of candidates[choice[b]].
  NodeId select_rows(std::span<const NodeId> candidates, std::span<const int> choice);

  /// Row-wise max over single-column candidates. Ties go to the lowest
  /// candidate index; the gradient flows only into the selected candidate.
  NodeId max_select(std::span<const NodeId> candidates);

  /// Per-row choices made by a select_rows or max_select node.
  std::span<const int> choices(NodeId node) const;

  /// Smallest gap between the winner and runner-up over every max_select row
  /// recorded so far (+inf if none had two candidates).
  double min_select_margin() const { return min_margin_; }

  const Matrix& value(NodeId node) const;
  /// Gradient of the last backward seed with respect to a node; zero-sized if
  /// the node carries no gradient.
  const Matrix& grad(NodeId node) const;
  OpKind kind(NodeId node) const;

  /// Reverse pass from a 1x1 seed; adds d(seed)/d(param) into every tracked
  /// parameter's gradient block. Node gradients are recomputed from scratch on
  /// every call. Throws ContractError if the seed is not scalar.
  void backward(NodeId seed);

  std::size_t size() const { return nodes_.size(); }
  std::size_t count(OpKind kind) const;
  void clear();

 private:
  struct Node {
    OpKind kind = OpKind::kConstant;
    Matrix value;
    bool needs_grad = false;
    NodeId a, b;
    ParamRef weight, bias;
    double factor = 0.0;
    Eigen::Index offset = 0;
    std::vector<NodeId> inputs;
    std::vector<int> choice;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  double min_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace ace::num
