#ifndef MEMFAIR_CONSISTENCY_HPP_
#define MEMFAIR_CONSISTENCY_HPP_

#include <string>
#include <vector>

#include "memfair/graph.hpp"

namespace memfair {

enum class ModelId { SC, TSO, RA, StrongCOH };

const char* model_name(ModelId m);
ModelId model_from_name(const std::string& s);  // throws Error(Syntax)

/// The derived relations every model verdict is phrased in.
struct DerivedRelations {
  Relation po, po_loc, rf, mo, fr;
  Relation hb_sc;    // (po | rf | mo | fr)+
  Relation rfe;      // rf \ po
  Relation ppo;      // po \ ((W\RMW) x (R\RMW))
  Relation hb_tso;   // (ppo | rfe | mo | fr)+
  Relation sc_loc;   // (po|loc | rf | mo | fr)+
  Relation hb_ra;    // (po | rf)+
  Relation ra_loc;   // (hb_ra|loc | rf | mo | fr)+
};

DerivedRelations derived(const ExecutionGraph& g);

struct ConsistencyVerdict {
  bool consistent = true;
  std::string axiom;       // failed irreflexivity condition, e.g. "hb_tso"
  std::vector<int> cycle;  // event indices of a canonical minimal cycle
};

/// SC: hb_sc irreflexive. TSO: hb_tso and sc_loc irreflexive.
/// RA: ra_loc irreflexive. StrongCOH: hb_ra and sc_loc irreflexive.
/// On failure the verdict carries the shortest violating cycle in the
/// union underlying the failed closure (canonical, for stable goldens).
ConsistencyVerdict is_consistent(const ExecutionGraph& g, ModelId m);

bool consistent(const ExecutionGraph& g, ModelId m);

}  // namespace memfair

#endif  // MEMFAIR_CONSISTENCY_HPP_
