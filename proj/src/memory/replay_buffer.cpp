#include "ace/memory/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "ace/errors.hpp"

namespace ace::memory {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim)
    : items_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (t.s.size() != obs_dim_ || t.s_next.size() != obs_dim_ || t.a.size() != act_dim_) {
    throw DimensionError("replay push: transition shape does not match (obs " +
                         std::to_string(obs_dim_) + ", act " + std::to_string(act_dim_) + ")");
  }
  if (!std::isfinite(t.r)) throw NumericError("replay push: non-finite reward");
  items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % items_.size();
  if (size_ < items_.size()) ++size_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (size_ == 0) throw ContractError("replay sample: buffer is empty");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(size_);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i : sample_indices(batch, rng)) out.push_back(at(i));
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractError("replay at: index out of range");
  // Before the first wrap the oldest item is slot 0; afterwards it is the cursor.
  const std::size_t start = size_ < items_.size() ? 0 : cursor_;
  return items_[(start + i) % items_.size()];
}

}  // namespace ace::memory
