#include "ace/numcore/tape.hpp"

#include <algorithm>
#include <string>

#include "ace/errors.hpp"
#include "ace/numcore/kernels.hpp"

namespace ace::num {

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index < 0 || static_cast<std::size_t>(id.index) >= nodes_.size()) {
    throw ContractError("tape: node id " + std::to_string(id.index) + " out of range");
  }
  return nodes_[static_cast<std::size_t>(id.index)];
}

NodeId Tape::constant(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::input(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Tape::affine(NodeId x, ParamRef weight, ParamRef bias) {
  const Node& in = node(x);
  if (!in.value.allFinite()) {
    throw NumericError("affine: non-finite input");
  }
  Node n;
  n.kind = OpKind::kAffine;
  n.value = kernels::affine(in.value, weight.value(), bias.value());
  n.needs_grad = in.needs_grad || weight.track || bias.track;
  n.a = x;
  n.weight = weight;
  n.bias = bias;
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId x) {
  const Node& in = node(x);
  Node n;
  n.kind = OpKind::kTanh;
  n.value = in.value;
  kernels::tanh_inplace(n.value);
  n.needs_grad = in.needs_grad;
  n.a = x;
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw DimensionError("add: shape mismatch");
  }
  Node n;
  n.kind = OpKind::kAdd;
  n.value = na.value + nb.value;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::concat(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Node n;
  n.kind = OpKind::kConcat;
  n.value = kernels::concat(na.value, nb.value);
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::slice(NodeId x, Eigen::Index offset, Eigen::Index width) {
  const Node& in = node(x);
  if (offset < 0 || width < 0 || offset + width > in.value.cols()) {
    throw DimensionError("slice: columns out of range");
  }
  Node n;
  n.kind = OpKind::kSlice;
  n.value = in.value.middleCols(offset, width);
  n.needs_grad = in.needs_grad;
  n.a = x;
  n.offset = offset;
  return push(std::move(n));
}

NodeId Tape::square(NodeId x) {
  const Node& in = node(x);
  Node n;
  n.kind = OpKind::kSquare;
  n.value = in.value.array().square().matrix();
  n.needs_grad = in.needs_grad;
  n.a = x;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
  const Node& in = node(x);
  Node n;
  n.kind = OpKind::kSum;
  n.value = Matrix::Constant(1, 1, in.value.sum());
  n.needs_grad = in.needs_grad;
  n.a = x;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double factor) {
  const Node& in = node(x);
  Node n;
  n.kind = OpKind::kScale;
  n.value = factor * in.value.array();
  n.needs_grad = in.needs_grad;
  n.a = x;
  n.factor = factor;
  return push(std::move(n));
}

NodeId Tape::select_rows(std::span<const NodeId> candidates, std::span<const int> choice) {
  if (candidates.empty()) {
    throw ContractError("select_rows: no candidates");
  }
  const Matrix& first = node(candidates[0]).value;
  if (static_cast<Eigen::Index>(choice.size()) != first.rows()) {
    throw DimensionError("select_rows: choice length differs from batch size");
  }
  Node n;
  n.kind = OpKind::kSelectRows;
  n.value.resize(first.rows(), first.cols());
  for (NodeId c : candidates) {
    const Node& cn = node(c);
    if (cn.value.rows() != first.rows() || cn.value.cols() != first.cols()) {
      throw DimensionError("select_rows: candidate shapes differ");
    }
    n.needs_grad = n.needs_grad || cn.needs_grad;
  }
  for (std::size_t r = 0; r < choice.size(); ++r) {
    const int k = choice[r];
    if (k < 0 || static_cast<std::size_t>(k) >= candidates.size()) {
      throw ContractError("select_rows: choice out of range");
    }
    n.value.row(static_cast<Eigen::Index>(r)) =
        node(candidates[static_cast<std::size_t>(k)]).value.row(static_cast<Eigen::Index>(r));
  }
  n.inputs.assign(candidates.begin(), candidates.end());
  n.choice.assign(choice.begin(), choice.end());
  return push(std::move(n));
}

NodeId Tape::max_select(std::span<const NodeId> candidates) {
  if (candidates.empty()) {
    throw ContractError("max_select: no candidates");
  }
  const Eigen::Index rows = node(candidates[0]).value.rows();
  std::vector<int> choice(static_cast<std::size_t>(rows), 0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double best = node(candidates[0]).value(r, 0);
    double second = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
      const double v = node(candidates[k]).value(r, 0);
      if (v > best) {
        second = best;
        best = v;
        arg = static_cast<int>(k);
      } else if (v > second) {
        second = v;
      }
    }
    if (candidates.size() > 1) min_margin_ = std::min(min_margin_, best - second);
    choice[static_cast<std::size_t>(r)] = arg;
  }
  return select_rows(candidates, choice);
}

std::span<const int> Tape::choices(NodeId id) const {
  const Node& n = node(id);
  if (n.kind != OpKind::kSelectRows) {
    throw ContractError("choices: node is not a selection");
  }
  return n.choice;
}

const Matrix& Tape::value(NodeId id) const { return node(id).value; }

const Matrix& Tape::grad(NodeId id) const {
  node(id);
  return grads_[static_cast<std::size_t>(id.index)];
}

OpKind Tape::kind(NodeId id) const { return node(id).kind; }

std::size_t Tape::count(OpKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.kind == kind; }));
}

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
  min_margin_ = std::numeric_limits<double>::infinity();
}

void Tape::backward(NodeId seed) {
  const Node& s = node(seed);
  if (s.value.rows() != 1 || s.value.cols() != 1) {
    throw ContractError("backward: seed node must be 1x1");
  }
  grads_.assign(nodes_.size(), Matrix());
  grads_[static_cast<std::size_t>(seed.index)] = Matrix::Ones(1, 1);

  auto accumulate = [this](NodeId target, const auto& contribution) {
    const Node& t = nodes_[static_cast<std::size_t>(target.index)];
    if (!t.needs_grad) return;
    Matrix& g = grads_[static_cast<std::size_t>(target.index)];
    if (g.size() == 0) {
      g = contribution;
    } else {
      g += contribution;
    }
  };

  for (int i = seed.index; i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    const Matrix& g = grads_[static_cast<std::size_t>(i)];
    if (g.size() == 0 || !n.needs_grad) continue;
    switch (n.kind) {
      case OpKind::kConstant:
        break;
      case OpKind::kAffine: {
        const Matrix& x = nodes_[static_cast<std::size_t>(n.a.index)].value;
        if (n.weight.track) {
          n.weight.store->block(n.weight.index).grad.noalias() += g.transpose() * x;
        }
        if (n.bias.track) {
          n.bias.store->block(n.bias.index).grad.col(0) += g.colwise().sum().transpose();
        }
        if (nodes_[static_cast<std::size_t>(n.a.index)].needs_grad) {
          Matrix gx(g.rows(), n.weight.value().cols());
          gx.noalias() = g * n.weight.value();
          accumulate(n.a, gx);
        }
        break;
      }
      case OpKind::kTanh:
        accumulate(n.a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case OpKind::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case OpKind::kConcat: {
        const Eigen::Index left = nodes_[static_cast<std::size_t>(n.a.index)].value.cols();
        accumulate(n.a, Matrix(g.leftCols(left)));
        accumulate(n.b, Matrix(g.rightCols(g.cols() - left)));
        break;
      }
      case OpKind::kSlice: {
        const Matrix& x = nodes_[static_cast<std::size_t>(n.a.index)].value;
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        gx.middleCols(n.offset, g.cols()) = g;
        accumulate(n.a, gx);
        break;
      }
      case OpKind::kSquare: {
        const Matrix& x = nodes_[static_cast<std::size_t>(n.a.index)].value;
        accumulate(n.a, (2.0 * x.array() * g.array()).matrix());
        break;
      }
      case OpKind::kSum: {
        const Matrix& x = nodes_[static_cast<std::size_t>(n.a.index)].value;
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case OpKind::kScale:
        accumulate(n.a, (n.factor * g.array()).matrix());
        break;
      case OpKind::kSelectRows: {
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Node& in = nodes_[static_cast<std::size_t>(n.inputs[k].index)];
          if (!in.needs_grad) continue;
          Matrix gk = Matrix::Zero(g.rows(), g.cols());
          bool any = false;
          for (std::size_t r = 0; r < n.choice.size(); ++r) {
            if (n.choice[r] == static_cast<int>(k)) {
              gk.row(static_cast<Eigen::Index>(r)) = g.row(static_cast<Eigen::Index>(r));
              any = true;
            }
          }
          if (any) accumulate(n.inputs[k], gk);
        }
        break;
      }
    }
  }
}

}  // namespace ace::num
