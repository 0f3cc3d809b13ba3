#ifndef MEMFAIR_CORRESPOND_HPP_
#define MEMFAIR_CORRESPOND_HPP_

#include "memfair/machine.hpp"

namespace memfair {

/// Graph of an SC trace: rf maps each read to the latest prior
/// same-location write, mo is the trace order on same-location writes.
ExecutionGraph sc_trace_to_graph(const AnnotatedTrace& t);

/// Graph of a TSO trace. Each buffered write is matched with its
/// propagation (Error(UnpropagatedWrite) when one is missing); a write
/// becomes visible at its propagation index, reads and RMWs at their own.
/// mo follows visibility; rf is the latest same-thread buffered write,
/// or else the latest visible one.
ExecutionGraph tso_trace_to_graph(const AnnotatedTrace& t);

/// Graph of an RA/StrongCOH trace: rf links a read to the event that
/// created the message it read; mo follows the timestamp order.
ExecutionGraph ra_trace_to_graph(const AnnotatedTrace& t);

/// Dispatches on t.model.
ExecutionGraph trace_to_graph(const AnnotatedTrace& t);

/// Total order on g's non-init events extending the acyclic relation r
/// (ties broken canonically). Error(Cyclic) when r has a cycle.
std::vector<int> enumerate_respecting(const ExecutionGraph& g, const Relation& r);

/// Builds a machine trace of model m whose behavior equals g's.
/// SC: an enumeration respecting hb_sc replayed directly. TSO: an
/// enumeration respecting hb_tso where reads pull in their unexecuted
/// program-order-prior writes and every write appends its propagation.
/// RA/StrongCOH: an enumeration respecting po-union-rf with timestamps
/// assigned by mo rank, interleaved with propagation steps placed at
/// per-thread safe points, so every message reaches every thread.
/// Error(InconsistentInput) when g is not consistent under m.
AnnotatedTrace graph_to_fair_trace(const ExecutionGraph& g, ModelId m);

}  // namespace memfair

#endif  // MEMFAIR_CORRESPOND_HPP_
