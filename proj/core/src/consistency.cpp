#include "memfair/consistency.hpp"

#include "memfair/errors.hpp"

namespace memfair {

const char* model_name(ModelId m) {
  switch (m) {
    case ModelId::SC:
      return "sc";
    case ModelId::TSO:
      return "tso";
    case ModelId::RA:
      return "ra";
    case ModelId::StrongCOH:
      return "strongcoh";
  }
  return "?";
}

ModelId model_from_name(const std::string& s) {
  if (s == "sc" || s == "SC") return ModelId::SC;
  if (s == "tso" || s == "TSO") return ModelId::TSO;
  if (s == "ra" || s == "RA") return ModelId::RA;
  if (s == "strongcoh" || s == "StrongCOH" || s == "scoh")
    return ModelId::StrongCOH;
  throw Error(ErrorCode::Syntax, "unknown model '" + s + "'");
}

DerivedRelations derived(const ExecutionGraph& g) {
  DerivedRelations d;
  d.po = g.po();
  d.rf = g.rf;
  d.mo = g.mo;
  d.fr = g.fr();
  d.po_loc = g.po_loc();
  d.hb_sc = (d.po | d.rf | d.mo | d.fr).closure();
  d.rfe = d.rf - d.po;
  d.ppo = d.po.filter([&](int a, int b) {
    return !(g.is_write(a) && !g.is_rmw(a) && g.is_read(b) && !g.is_rmw(b));
  });
  d.hb_tso = (d.ppo | d.rfe | d.mo | d.fr).closure();
  d.sc_loc = (d.po_loc | d.rf | d.mo | d.fr).closure();
  d.hb_ra = (d.po | d.rf).closure();
  Relation hb_ra_loc = d.hb_ra & g.same_loc_pairs();
  d.ra_loc = (hb_ra_loc | d.rf | d.mo | d.fr).closure();
  return d;
}

namespace {

// The failed axiom's cycle is reported in the closure's underlying union.
ConsistencyVerdict violation(const std::string& axiom, const Relation& base) {
  ConsistencyVerdict v;
  v.consistent = false;
  v.axiom = axiom;
  v.cycle = base.shortest_cycle();
  return v;
}

}  // namespace

ConsistencyVerdict is_consistent(const ExecutionGraph& g, ModelId m) {
  DerivedRelations d = derived(g);
  const Relation sc_base = d.po | d.rf | d.mo | d.fr;
  const Relation tso_base = d.ppo | d.rfe | d.mo | d.fr;
  const Relation scloc_base = d.po_loc | d.rf | d.mo | d.fr;
  const Relation ra_base = d.po | d.rf;
  const Relation raloc_base = (d.hb_ra & g.same_loc_pairs()) | d.rf | d.mo | d.fr;
  switch (m) {
    case ModelId::SC:
      if (!d.hb_sc.irreflexive()) return violation("hb_sc", sc_base);
      break;
    case ModelId::TSO:
      if (!d.hb_tso.irreflexive()) return violation("hb_tso", tso_base);
      if (!d.sc_loc.irreflexive()) return violation("sc_loc", scloc_base);
      break;
    case ModelId::RA:
      if (!d.ra_loc.irreflexive()) return violation("ra_loc", raloc_base);
      break;
    case ModelId::StrongCOH:
      if (!d.hb_ra.irreflexive()) return violation("hb_ra", ra_base);
      if (!d.sc_loc.irreflexive()) return violation("sc_loc", scloc_base);
      break;
  }
  return {};
}

bool consistent(const ExecutionGraph& g, ModelId m) {
  return is_consistent(g, m).consistent;
}

}  // namespace memfair
