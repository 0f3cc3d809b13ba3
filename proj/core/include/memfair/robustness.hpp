#ifndef MEMFAIR_ROBUSTNESS_HPP_
#define MEMFAIR_ROBUSTNESS_HPP_

#include <optional>

#include "memfair/enumerate.hpp"

namespace memfair {

struct RobustnessVerdict {
  bool robust = true;
  /// Minimal non-robustness witness: a consistent graph of the model that
  /// is not SC-consistent and none of whose proper po-union-rf prefixes
  /// is SC-inconsistent.
  std::optional<ExecutionGraph> witness;
  EnumerationStats stats;
};

/// A program is finitely robust against m when every m-consistent graph
/// of its bounded runs (including partial runs) is also SC-consistent.
RobustnessVerdict check_finite_robustness(const Program& p, ModelId m,
                                          const ExplorationBounds& b,
                                          int workers = 1);

/// Samples po-union-rf prefixes of a consistent graph and re-checks
/// consistency on each (premise of lifting finite robustness to infinite
/// runs). Deterministic in `seed`.
bool check_prefix_closedness(const ExecutionGraph& g, ModelId m, int samples,
                             std::uint64_t seed = 1);

}  // namespace memfair

#endif  // MEMFAIR_ROBUSTNESS_HPP_
