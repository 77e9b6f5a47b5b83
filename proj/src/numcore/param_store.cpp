#include "ace/numcore/param_store.hpp"

#include "ace/errors.hpp"

namespace ace::num {

int ParamStore::add(std::string name, Matrix init) {
  if (by_name_.contains(name)) {
    throw ConfigError("duplicate parameter block '" + name + "'");
  }
  const int id = static_cast<int>(blocks_.size());
  Matrix grad = Matrix::Zero(init.rows(), init.cols());
  by_name_.emplace(name, id);
  blocks_.push_back(ParamBlock{std::move(name), std::move(init), std::move(grad)});
  return id;
}

int ParamStore::index(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) {
    throw ConfigError("unknown parameter block '" + std::string(name) + "'");
  }
  return it->second;
}

bool ParamStore::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += static_cast<std::size_t>(b.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& b : blocks_) b.grad.setZero();
}

bool ParamStore::all_finite() const {
  for (const auto& b : blocks_) {
    if (!b.value.allFinite()) return false;
  }
  return true;
}

}  // namespace ace::num
