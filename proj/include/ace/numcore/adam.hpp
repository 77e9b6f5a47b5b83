#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ace/numcore/param_store.hpp"

namespace ace::num {

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments for a subset of a store's blocks.
class AdamState {
 public:
  /// Optimizes the listed blocks of `store`.
  AdamState(const ParamStore& store, std::vector<int> blocks, AdamSettings settings);
  /// Optimizes every block of `store`.
  AdamState(const ParamStore& store, AdamSettings settings);

  const AdamSettings& settings() const { return settings_; }
  std::int64_t step_count() const { return steps_; }
  const std::vector<int>& blocks() const { return blocks_; }
  const Matrix& first_moment(std::size_t k) const { return m_[k]; }
  const Matrix& second_moment(std::size_t k) const { return v_[k]; }

 private:
  friend void adam_step(ParamStore& store, AdamState& opt);

  AdamSettings settings_;
  std::vector<int> blocks_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t steps_ = 0;
};

/// One bias-corrected Adam update of the optimizer's blocks, then zeroes
/// their gradients and bumps the store version. Throws NumericError naming
/// the first block with a non-finite gradient; nothing is modified then.
void adam_step(ParamStore& store, AdamState& opt);

}  // namespace ace::num
