#ifndef MEMFAIR_MACHINE_HPP_
#define MEMFAIR_MACHINE_HPP_

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "memfair/consistency.hpp"
#include "memfair/program.hpp"

namespace memfair {

struct SCState {
  std::vector<Value> mem;  // per location

  bool operator==(const SCState&) const = default;
};

struct TSOState {
  std::vector<Value> mem;
  // Per-thread FIFO store buffer; back = most recent write.
  std::vector<std::deque<std::pair<LocId, Value>>> buffers;

  bool operator==(const TSOState&) const = default;
};

/// Message of the RA/StrongCOH machines. Timestamps are kept
/// order-isomorphic: a message's timestamp is its position in the
/// per-location order; ids are stable handles across insertions.
struct RAMessage {
  LocId loc = 0;
  Value val = 0;
  std::vector<int> view;  // per location: observed message id
  // Nothing may be placed between this message and its mo-predecessor
  // (it is the write part of an RMW).
  bool locked_to_pred = false;

  bool operator==(const RAMessage&) const = default;
};

struct RAState {
  std::vector<RAMessage> msgs;          // indexed by id
  std::vector<std::vector<int>> order;  // per location: ids in mo order
  std::vector<std::vector<int>> views;  // per thread: per location: id

  int pos(LocId x, int id) const;
  int view_pos(Tid t, LocId x) const;

  bool operator==(const RAState&) const = default;
};

struct MachineState {
  ModelId model = ModelId::SC;
  SCState sc;
  TSOState tso;
  RAState ra;  // shared by RA and StrongCOH

  bool operator==(const MachineState&) const = default;
  /// Canonical form (RA ids replaced by positions); equal states of the
  /// same machine have equal keys.
  std::string key() const;
};

MachineState machine_init(ModelId m, int loc_count, int thread_count);

/// One transition of the linked program+memory system.
struct TransitionLabel {
  enum class Kind { Obs, PropTSO, PropRA };
  Kind kind = Kind::Obs;
  Tid tid = 0;
  EventLabel lab;        // Obs
  int msg_id = -1;       // PropRA target message
  int ra_write_pos = -1; // RA writes: insertion position; -1 = append
  // RMW-family program instruction (drains the TSO buffer, including a
  // failed CAS encoded as a plain read).
  bool locked = false;
  // Annotations filled in when the step executes under RA/StrongCOH.
  int read_msg = -1;
  int write_msg = -1;
};

struct OperationalOptions {
  /// Failed CAS reads require an empty TSO buffer (locked instruction).
  bool tso_locked_failed_cas = true;
  /// Enumerate every RA write placement, not just appends.
  bool all_ra_placements = true;
};

/// Applies a transition to the memory system alone. Observable labels must
/// be enabled per the model's rule (Error(NotEnabled) otherwise); the
/// returned label carries the RA message annotations.
MachineState machine_step(const MachineState& s, TransitionLabel& t,
                          const OperationalOptions& opt = {});

struct LinkedState {
  ProgState prog;
  MachineState mach;
};

LinkedState linked_init(const Program& p, ModelId m);

/// Observable transitions enabled in both the program and the memory
/// system, plus the memory system's enabled silent transitions.
std::vector<TransitionLabel> enabled_transitions(const Program& p,
                                                 const LinkedState& s,
                                                 const OperationalOptions& opt = {});

/// Steps program and memory together; fills the label's annotations.
LinkedState linked_step(const Program& p, const LinkedState& s,
                        TransitionLabel& t, const OperationalOptions& opt = {});

struct FairSchedulerConfig {
  long max_steps = 10000;
  int delay_bound = 0;  // bounded-delay fairness window; 0 = 4 * #threads
  std::uint64_t seed = 0;
  /// Demonstration override: never schedule silent memory transitions.
  bool unfair_no_silent = false;
};

struct AnnotatedStep {
  TransitionLabel t;
  MachineState post;
};

/// A run of the linked system with machine-state snapshots per step.
struct AnnotatedTrace {
  ModelId model = ModelId::SC;
  int thread_count = 0;
  std::vector<std::string> locs;
  MachineState initial;
  std::vector<AnnotatedStep> steps;

  Behavior behavior() const;
};

/// Randomized run under bounded-delay fairness: no transition class
/// (a thread, or one silent label) stays continuously enabled for more
/// than `delay_bound` consecutive steps without being taken. Stops at
/// program termination or after max_steps.
AnnotatedTrace fair_run(const Program& p, ModelId m,
                        const FairSchedulerConfig& cfg);

Behavior behavior_of_trace(const AnnotatedTrace& t);

/// Exhaustive bounded exploration of the linked system: the set of
/// behaviors of runs in which every thread terminates having emitted at
/// most max_events_per_thread labels. Deterministic output order.
std::vector<Behavior> explore_operational(const Program& p, ModelId m,
                                          int max_events_per_thread,
                                          const OperationalOptions& opt = {});

}  // namespace memfair

#endif  // MEMFAIR_MACHINE_HPP_
