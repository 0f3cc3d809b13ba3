#ifndef MEMFAIR_JSON_IO_HPP_
#define MEMFAIR_JSON_IO_HPP_

#include <string>

#include "memfair/machine.hpp"
#include "memfair/robustness.hpp"
#include "memfair/termination.hpp"

namespace memfair {

/// Graph schema:
///   {"events": [{"tid", "sn", "kind", "loc", "valR", "valW"}],
///    "rf": [[i, j]], "mo": [[i, j]]}
/// with init events carrying null tid/sn and indices referring to the
/// events array.
std::string graph_to_json(const ExecutionGraph& g, bool pretty = false);
ExecutionGraph graph_from_json(const std::string& text);

/// DOT rendering: program order solid, rf/mo/fr labeled.
std::string graph_to_dot(const ExecutionGraph& g);

/// Trace schema: {"model", "steps": [{"kind": "obs"|"prop", "tid",
/// "label"?, "loc"?, "ts"?}]}.
std::string trace_to_json(const AnnotatedTrace& t, bool pretty = false);

std::string outcome_to_json(bool allowed, const ExecutionGraph* witness,
                            bool pretty = false);
std::string termination_to_json(const TerminationVerdict& v, bool pretty = false);
std::string robustness_to_json(const RobustnessVerdict& v, bool pretty = false);

}  // namespace memfair

#endif  // MEMFAIR_JSON_IO_HPP_
