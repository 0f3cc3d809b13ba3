#include "doctest.h"
#include "memfair/consistency.hpp"
#include "test_helpers.hpp"

using namespace memfair;
using namespace memfair::testing;

namespace {

ExecutionGraph sb_weak_graph() {
  Event ix = Event::init(0), iy = Event::init(1);
  Event wx = Event::make(1, 0, EventLabel::make_write(0, 1));
  Event ry = Event::make(1, 1, EventLabel::make_read(1, 0));
  Event wy = Event::make(2, 0, EventLabel::make_write(1, 1));
  Event rx = Event::make(2, 1, EventLabel::make_read(0, 0));
  return make_graph({"x", "y"}, {ix, iy, wx, ry, wy, rx},
                    {{iy, ry}, {ix, rx}}, {{ix, wx}, {iy, wy}});
}

// Message passing with a = 1 and b = 0.
ExecutionGraph mp_weak_graph() {
  Event ix = Event::init(0), iy = Event::init(1);
  Event wx = Event::make(1, 0, EventLabel::make_write(0, 1));
  Event wy = Event::make(1, 1, EventLabel::make_write(1, 1));
  Event ry = Event::make(2, 0, EventLabel::make_read(1, 1));
  Event rx = Event::make(2, 1, EventLabel::make_read(0, 0));
  return make_graph({"x", "y"}, {ix, iy, wx, wy, ry, rx},
                    {{wy, ry}, {ix, rx}}, {{ix, wx}, {iy, wy}});
}

ExecutionGraph two_rmw_graph(bool mo_first_to_second) {
  Event ix = Event::init(0);
  Event u1 = Event::make(1, 0, EventLabel::make_rmw(0, 0, 1));
  Event u2 = Event::make(2, 0, EventLabel::make_rmw(0, 0, 1));
  std::vector<std::pair<Event, Event>> mo = {{ix, u1}, {ix, u2}};
  if (mo_first_to_second)
    mo.push_back({u1, u2});
  else
    mo.push_back({u2, u1});
  return make_graph({"x"}, {ix, u1, u2}, {{ix, u1}, {ix, u2}}, mo);
}

}  // namespace

TEST_CASE("derived relations on the SB graph") {
  ExecutionGraph g = sb_weak_graph();
  DerivedRelations d = derived(g);
  CHECK_FALSE(d.hb_sc.irreflexive());  // po+fr cycle
  CHECK(d.hb_tso.irreflexive());       // W->R po edges dropped from ppo
  CHECK(d.sc_loc.irreflexive());
  CHECK(d.hb_ra.irreflexive());
  CHECK(d.ra_loc.irreflexive());
  // Both rf edges come from init events, which precede everything in po,
  // so nothing is external.
  CHECK(d.rfe.empty());
  // ppo drops every plain-write-to-plain-read pair: the two intra-thread
  // ones and the four init-to-read ones.
  CHECK(d.po.pairs().size() == d.ppo.pairs().size() + 6);
}

TEST_CASE("derived relations on the init-only graph") {
  ExecutionGraph g = make_graph({"x"}, {Event::init(0)}, {}, {});
  DerivedRelations d = derived(g);
  CHECK(d.hb_sc.empty());
  CHECK(d.hb_tso.empty());
  CHECK(d.ra_loc.empty());
}

TEST_CASE("litmus verdicts match the model definitions") {
  SUBCASE("SB: SC-inconsistent, TSO/RA/StrongCOH-consistent") {
    ExecutionGraph g = sb_weak_graph();
    auto v = is_consistent(g, ModelId::SC);
    CHECK_FALSE(v.consistent);
    CHECK(v.axiom == "hb_sc");
    // The canonical minimal cycle is two po and two fr edges.
    CHECK(v.cycle.size() == 4);
    CHECK(consistent(g, ModelId::TSO));
    CHECK(consistent(g, ModelId::RA));
    CHECK(consistent(g, ModelId::StrongCOH));
  }
  SUBCASE("MP: RA-inconsistent via ra_loc, StrongCOH-consistent") {
    ExecutionGraph g = mp_weak_graph();
    CHECK_FALSE(consistent(g, ModelId::SC));
    CHECK_FALSE(consistent(g, ModelId::TSO));
    auto v = is_consistent(g, ModelId::RA);
    CHECK_FALSE(v.consistent);
    CHECK(v.axiom == "ra_loc");
    CHECK(consistent(g, ModelId::StrongCOH));
  }
  SUBCASE("2RMW both reading 0: inconsistent for either mo, all models") {
    for (bool dir : {true, false}) {
      ExecutionGraph g = two_rmw_graph(dir);
      for (ModelId m : kAllModels) {
        CAPTURE(model_name(m));
        CHECK_FALSE(consistent(g, m));
      }
    }
  }
}

TEST_CASE("reported cycles re-validate against the axiom's relations") {
  ExecutionGraph g = sb_weak_graph();
  DerivedRelations d = derived(g);
  auto v = is_consistent(g, ModelId::SC);
  REQUIRE_FALSE(v.consistent);
  Relation base = d.po | d.rf | d.mo | d.fr;
  for (size_t i = 0; i < v.cycle.size(); ++i)
    CHECK(base.at(v.cycle[i], v.cycle[(i + 1) % v.cycle.size()]));
}

TEST_CASE("verdicts are pure: same graph, same cycle") {
  ExecutionGraph g = mp_weak_graph();
  auto v1 = is_consistent(g, ModelId::RA);
  auto v2 = is_consistent(g, ModelId::RA);
  CHECK(v1.cycle == v2.cycle);
  CHECK(v1.axiom == v2.axiom);
}

TEST_CASE("model strength on enumerated graphs") {
  // SC => TSO => StrongCOH and SC => RA => StrongCOH, graph by graph.
  for (const char* f : {"sb.lit", "mp.lit", "2rmw.lit", "sb_rmws.lit"}) {
    CAPTURE(f);
    Program p = corpus_program(f);
    auto res = enumerate_consistent_graphs(p, ModelId::StrongCOH,
                                           ExplorationBounds{});
    for (const auto* eg : res.complete()) {
      const ExecutionGraph& g = eg->graph;
      if (consistent(g, ModelId::SC)) {
        CHECK(consistent(g, ModelId::TSO));
        CHECK(consistent(g, ModelId::RA));
      }
      if (consistent(g, ModelId::TSO)) CHECK(consistent(g, ModelId::StrongCOH));
      if (consistent(g, ModelId::RA)) CHECK(consistent(g, ModelId::StrongCOH));
    }
  }
}

TEST_CASE("model names round trip") {
  for (ModelId m : kAllModels) CHECK(model_from_name(model_name(m)) == m);
  CHECK_THROWS(model_from_name("power"));
}

TEST_CASE("preserved program order is 2n-total on enumerated graphs") {
  for (const char* f : {"sb.lit", "sb_rmws.lit"}) {
    CAPTURE(f);
    Program p = corpus_program(f);
    const int n = p.thread_count();
    auto res = enumerate_consistent_graphs(p, ModelId::TSO, ExplorationBounds{});
    for (const auto* eg : res.complete()) {
      DerivedRelations d = derived(eg->graph);
      CHECK(d.ppo.n_total(eg->graph.non_init_indices(), 2 * n));
    }
  }
}

TEST_CASE("restricting to the ancestors of a violating cycle keeps the "
          "violation") {
  Program p = corpus_program("sb.lit");
  Assertion a = parse_assertion("a = 0 && b = 0", p.source());
  auto out = check_outcome(p, ModelId::TSO, a, ExplorationBounds{});
  REQUIRE(out.witness.has_value());
  const ExecutionGraph& g = out.witness->graph;
  auto v = is_consistent(g, ModelId::SC);
  REQUIRE_FALSE(v.consistent);
  Relation anc = (g.po() | g.rf).closure();
  std::vector<bool> keep(g.size(), false);
  for (int i = 0; i < g.size(); ++i) {
    if (g.events[i].is_init()) keep[i] = true;
    for (int c : v.cycle)
      if (i == c || anc.at(i, c)) keep[i] = true;
  }
  ExecutionGraph prefix = restrict_to_prefix(g, keep);
  CHECK(consistent(prefix, ModelId::TSO));
  CHECK_FALSE(consistent(prefix, ModelId::SC));
}
