#include "ace/numcore/adam.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::num {

AdamState::AdamState(const ParamStore& store, std::vector<int> blocks, AdamSettings settings)
    : settings_(settings), blocks_(std::move(blocks)) {
  for (int b : blocks_) {
    const Matrix& p = store.block(b).value;
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

namespace {
std::vector<int> all_blocks(const ParamStore& store) {
  std::vector<int> ids(static_cast<std::size_t>(store.size()));
  for (int i = 0; i < store.size(); ++i) ids[static_cast<std::size_t>(i)] = i;
  return ids;
}
}  // namespace

AdamState::AdamState(const ParamStore& store, AdamSettings settings)
    : AdamState(store, all_blocks(store), settings) {}

void adam_step(ParamStore& store, AdamState& opt) {
  for (int b : opt.blocks_) {
    if (!store.block(b).grad.allFinite()) {
      throw NumericError("adam_step: non-finite gradient in block '" + store.block(b).name + "'");
    }
  }
  const auto& s = opt.settings_;
  ++opt.steps_;
  const double t = static_cast<double>(opt.steps_);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t k = 0; k < opt.blocks_.size(); ++k) {
    ParamBlock& blk = store.block(opt.blocks_[k]);
    Matrix& m = opt.m_[k];
    Matrix& v = opt.v_[k];
    m = s.beta1 * m.array() + (1.0 - s.beta1) * blk.grad.array();
    v = s.beta2 * v.array() + (1.0 - s.beta2) * blk.grad.array().square();
    blk.value.array() -=
        s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
    blk.grad.setZero();
  }
  store.bump_version();
}

}  // namespace ace::num
