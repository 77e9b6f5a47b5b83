#pragma once

#include <functional>
#include <vector>

#include "ace/numcore/param_store.hpp"
#include "ace/numcore/tape.hpp"

namespace ace::num {

/// Builds a scalar (1x1) node on the given tape from the current contents of
/// the store under test.
using TapedScalar = std::function<NodeId(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  int worst_block = -1;
  Eigen::Index worst_entry = -1;
  std::size_t entries_checked = 0;
};

/// Compares the tape gradient of `f` against central differences of its
/// value, entry by entry over the selected blocks of `store` (all blocks if
/// `blocks` is empty). The error per entry is
/// |analytic - numeric| / max(1, |numeric|). Parameters are restored on exit.
/// Throws NumericError if f is non-finite at any probe.
GradCheckResult grad_check(const TapedScalar& f, ParamStore& store, double h,
                           const std::vector<int>& blocks = {});

}  // namespace ace::num
