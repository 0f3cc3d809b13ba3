#ifndef MEMFAIR_ENUMERATE_HPP_
#define MEMFAIR_ENUMERATE_HPP_

#include <optional>
#include <vector>

#include "memfair/consistency.hpp"
#include "memfair/parser.hpp"
#include "memfair/program.hpp"

namespace memfair {

struct ExplorationBounds {
  int max_events_per_thread = 12;
  /// Completed iterations each spinloop may run per visit; 0 = unbounded
  /// (an extra iteration that exits is always permitted).
  int spin_cap = 0;
  /// Read-value domain for program-level label enumeration only; empty
  /// means the program's default domain.
  std::vector<Value> value_domain;
};

enum class GraphStatus {
  Complete,  // all threads terminated
  Stuck,     // every thread terminated or capped at a spinloop head
  Clipped,   // exploration leaf cut by the event bound
};

struct EnumeratedGraph {
  ExecutionGraph graph;
  GraphStatus status = GraphStatus::Complete;
  std::vector<std::vector<Value>> final_regs;        // per thread
  std::vector<Tid> stuck_threads;                    // Stuck only
  std::vector<std::pair<int, int>> stuck_iter_sns;   // last full iteration
};

struct EnumerationStats {
  long explored = 0;
  long pruned_inconsistent = 0;
  long memo_hits = 0;
  long clipped = 0;
};

/// Strict raises Error(BoundExceeded) when a thread would need more than
/// the event budget outside a spinloop; Clip records such leaves instead.
enum class BoundMode { Strict, Clip };

struct EnumerationResult {
  std::vector<EnumeratedGraph> graphs;  // canonical order, deduplicated
  EnumerationStats stats;

  std::vector<const EnumeratedGraph*> complete() const;
  /// Behaviors of complete graphs, sorted.
  std::vector<Behavior> behaviors(int thread_count) const;
};

/// Exhaustively enumerates the consistent execution graphs of bounded
/// runs of p under model m: depth-first interleaving, branching over rf
/// sources among already-added same-location writes (plus init) at reads
/// and over insertion points of mo at writes, pruning prefixes that fail
/// the model's consistency predicate. Deterministic output.
/// `workers` > 1 distributes the top-level branches (results identical).
EnumerationResult enumerate_consistent_graphs(const Program& p, ModelId m,
                                              const ExplorationBounds& b,
                                              BoundMode mode = BoundMode::Strict,
                                              int workers = 1);

struct Outcome {
  bool allowed = false;
  std::optional<EnumeratedGraph> witness;
  EnumerationStats stats;
};

/// Litmus query: is some complete consistent graph's final register
/// valuation a model of the assertion?
Outcome check_outcome(const Program& p, ModelId m, const Assertion& a,
                      const ExplorationBounds& b, int workers = 1);

}  // namespace memfair

#endif  // MEMFAIR_ENUMERATE_HPP_
