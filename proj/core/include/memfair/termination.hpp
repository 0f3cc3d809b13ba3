#ifndef MEMFAIR_TERMINATION_HPP_
#define MEMFAIR_TERMINATION_HPP_

#include <optional>
#include <string>

#include "memfair/enumerate.hpp"

namespace memfair {

struct WitnessThreadCheck {
  Tid tid = 0;
  int iter_begin = -1, iter_end = -1;  // sn range of the final iteration
  bool reads_only = false;
  bool repeatable = false;   // re-running the iteration reproduces the state
  bool fr_empty = false;     // its reads have no fr-successors (mo-maximal)
};

struct WitnessCheck {
  bool is_witness = false;
  bool decidable = true;  // false when an iteration fails the repeat check
  std::string reason;
  std::vector<WitnessThreadCheck> threads;
};

/// Checks the non-termination witness conditions on a capped-enumeration
/// graph: at least one thread is non-terminated, and every such thread's
/// run ends with a full spinloop iteration whose events have no
/// fr-successors. Error(UnsupportedLoop) when a non-terminated thread is
/// not parked at a spinloop head.
WitnessCheck is_nontermination_witness(const ExecutionGraph& g, const Program& p);

struct TerminationVerdict {
  enum class Outcome { AllSpinloopsTerminate, MayDiverge, Unsupported };
  Outcome outcome = Outcome::AllSpinloopsTerminate;
  std::string reason;      // Unsupported only
  std::string model_note;  // e.g. witness mode on StrongCOH
  std::optional<EnumeratedGraph> witness;
  std::vector<Tid> stuck_threads;
  EnumerationStats stats;
};

/// Decides spinloop termination under fair memory: enumerates all runs in
/// which each spinloop completes at most one iteration per visit; a
/// blocked configuration whose final iterations read only mo-maximal
/// writes is a divergence witness, and if no such configuration exists,
/// every spinloop terminates. Programs whose unbounded behavior is not
/// confined to spinloops come back Unsupported.
TerminationVerdict analyze_termination(const Program& p, ModelId m,
                                       const ExplorationBounds& b,
                                       int workers = 1);

/// analyze_termination on the program with every thread body repeated
/// `rounds` times.
TerminationVerdict check_lock_progress(const ConcurrentProgram& p, ModelId m,
                                       int rounds, const ExplorationBounds& b,
                                       int workers = 1);

const char* outcome_name(TerminationVerdict::Outcome o);

}  // namespace memfair

#endif  // MEMFAIR_TERMINATION_HPP_
