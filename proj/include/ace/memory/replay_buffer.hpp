#pragma once

#include <cstddef>
#include <vector>

#include "ace/numcore/types.hpp"
#include "ace/rng.hpp"

namespace ace::memory {

/// One replay record. `terminal` marks physical terminals only; timeouts are
/// stored as non-terminal so they bootstrap. `actor` is the ensemble member
/// whose proposal was executed (-1 if unknown).
struct Transition {
  Vector s;
  Vector a;
  double r = 0.0;
  Vector s_next;
  bool terminal = false;
  int actor = -1;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim);

  /// Throws DimensionError on a shape mismatch, NumericError on a
  /// non-finite reward.
  void push(Transition t);

  /// Uniform draws with replacement. Throws ContractError when empty.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

  /// Indices into the ring for a batch, as drawn by sample().
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  /// The i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return items_.size(); }
  bool empty() const { return size_ == 0; }

 private:
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  int obs_dim_;
  int act_dim_;
};

}  // namespace ace::memory
