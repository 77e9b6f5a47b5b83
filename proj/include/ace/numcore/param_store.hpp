#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ace/numcore/types.hpp"

namespace ace::num {

/// One named parameter with its gradient accumulator. Vectors are stored as
/// single-column matrices.
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Owns every learnable block of a model. Gradient blocks always match the
/// shape of their parameter.
class ParamStore {
 public:
  /// Adds a block; the gradient starts at zero. Throws ConfigError on a
  /// duplicate name.
  int add(std::string name, Matrix init);

  /// Index of a named block. Throws ConfigError if absent.
  int index(std::string_view name) const;
  bool contains(std::string_view name) const;

  ParamBlock& block(int i) { return blocks_[static_cast<std::size_t>(i)]; }
  const ParamBlock& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  std::span<ParamBlock> blocks() { return blocks_; }
  std::span<const ParamBlock> blocks() const { return blocks_; }
  int size() const { return static_cast<int>(blocks_.size()); }

  /// Total number of scalar parameters.
  std::size_t scalar_count() const;

  void zero_grad();
  bool all_finite() const;

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }

 private:
  std::vector<ParamBlock> blocks_;
  std::unordered_map<std::string, int> by_name_;
  std::uint64_t version_ = 0;
};

/// A reference to one block of a store, plus whether a tape should
/// accumulate gradient into it.
struct ParamRef {
  ParamStore* store = nullptr;
  int index = -1;
  bool track = false;

  const Matrix& value() const { return store->block(index).value; }
};

}  // namespace ace::num
