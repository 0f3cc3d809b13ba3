#ifndef MEMFAIR_GRAPH_HPP_
#define MEMFAIR_GRAPH_HPP_

#include <optional>
#include <string>
#include <vector>

#include "memfair/label.hpp"
#include "memfair/relation.hpp"

namespace memfair {

/// An event: initialization events have tid 0 and sn -1 and are identified
/// by their location; all others are identified by (tid, sn).
struct Event {
  Tid tid = 0;
  int sn = -1;
  EventLabel lab;

  bool is_init() const { return tid == 0; }

  static Event init(LocId x) { return Event{0, -1, EventLabel::make_write(x, 0)}; }
  static Event make(Tid t, int sn, EventLabel l) { return Event{t, sn, l}; }
};

/// Canonical event order: init events by location, then (tid, sn).
bool event_canonical_less(const Event& a, const Event& b);

/// Per-thread sequences of event labels (index 0 = thread 1).
struct Behavior {
  std::vector<std::vector<EventLabel>> threads;

  int thread_count() const { return static_cast<int>(threads.size()); }
  bool operator==(const Behavior&) const = default;
  bool operator<(const Behavior& o) const { return key() < o.key(); }
  std::string key() const;
};

/// Execution graph: events plus reads-from and per-location modification
/// order. Events are kept in canonical order; rf/mo index into `events`.
/// Immutable by convention once built.
struct ExecutionGraph {
  std::vector<std::string> locs;
  std::vector<Event> events;
  Relation rf, mo;

  int size() const { return static_cast<int>(events.size()); }
  bool is_read(int i) const { return events[i].lab.is_read(); }
  bool is_write(int i) const { return events[i].lab.is_write(); }
  bool is_rmw(int i) const { return events[i].lab.is_rmw(); }
  LocId loc_of(int i) const { return events[i].lab.loc; }

  std::vector<int> non_init_indices() const;
  std::vector<int> writes_to(LocId x) const;  // in mo order

  /// Derived program order: init before non-init, same-thread sn order.
  Relation po() const;
  /// Derived from-read: (rf^-1 ; mo) minus identity.
  Relation fr() const;
  Relation po_loc() const;
  Relation same_loc_pairs() const;

  /// Index of the rf source of read `r`, or -1 when uncovered.
  int rf_source(int r) const;
  /// The mo-maximal write to x (init when no other writes exist).
  int mo_maximal(LocId x) const;

  /// Canonical string form; equal graphs have equal keys.
  std::string key() const;
  /// Labels of each thread in sn order.
  Behavior behavior(int thread_count) const;
};

/// Builds graphs out of canonically ordered parts; events may be supplied
/// in any order.
ExecutionGraph make_graph(std::vector<std::string> locs, std::vector<Event> events,
                          const std::vector<std::pair<Event, Event>>& rf_pairs,
                          const std::vector<std::pair<Event, Event>>& mo_pairs);

/// Init events for `locs` plus one event per behavior label.
std::vector<Event> events_of_behavior(const Behavior& b, int loc_count);

struct WellformedReport {
  bool ok = true;
  std::string violation;
};

/// Re-checks every well-formedness and execution-graph condition:
/// init coverage, (tid, sn) uniqueness and downward closure, rf typing and
/// value agreement, functional rf^-1, read coverage, and mo being a
/// disjoint union of per-location strict total orders on writes.
WellformedReport check_wellformed(const ExecutionGraph& g);

struct PrefixFiniteReport {
  int max_predecessors = 0;
  bool chain_law_checked = false;
  bool chain_law_holds = false;  // R^(2n+1) subset of R^(<=2n)
};

/// Finite-graph surrogate of prefix-finiteness: reports the largest
/// predecessor count and, when `r` is n-total on `universe`, checks the
/// chain-compression law. Throws Error(Cyclic) for cyclic input.
PrefixFiniteReport check_prefix_finite_bounded(const Relation& r,
                                               const std::vector<int>& universe,
                                               int n);

bool check_n_total(const Relation& r, const std::vector<int>& universe, int n);

/// Restriction of g to `keep` (event indices). `keep` must contain all
/// init events and be po-union-rf downward closed
/// (Error(NotPrefixClosed) otherwise).
ExecutionGraph restrict_to_prefix(const ExecutionGraph& g,
                                  const std::vector<bool>& keep);

/// All po-union-rf downward-closed index sets that contain Init, as masks.
/// Exponential; intended for small graphs only.
std::vector<std::vector<bool>> all_prefix_sets(const ExecutionGraph& g,
                                               size_t limit = 1u << 20);

}  // namespace memfair

#endif  // MEMFAIR_GRAPH_HPP_
