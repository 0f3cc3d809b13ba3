#include "doctest.h"
#include "memfair/robustness.hpp"
#include "test_helpers.hpp"

using namespace memfair;
using namespace memfair::testing;

TEST_CASE("single-thread programs are robust under every model") {
  Program p(parse_program(
      "locations x; thread 1 { store(x, 1); a = load(x); store(x, 2); "
      "halt; }"));
  for (ModelId m : kAllModels)
    CHECK(check_finite_robustness(p, m, ExplorationBounds{}).robust);
}

TEST_CASE("SB is non-robust under TSO with the minimal witness") {
  Program p = corpus_program("sb.lit");
  auto v = check_finite_robustness(p, ModelId::TSO, ExplorationBounds{});
  CHECK_FALSE(v.robust);
  REQUIRE(v.witness.has_value());
  const ExecutionGraph& w = *v.witness;
  // Structure of the canonical weak graph: 2 init + 4 events, both reads
  // from init, both program writes mo-maximal.
  CHECK(w.size() == 6);
  CHECK(consistent(w, ModelId::TSO));
  CHECK_FALSE(consistent(w, ModelId::SC));
  for (int i = 0; i < w.size(); ++i) {
    if (!w.is_read(i)) continue;
    CHECK(w.events[w.rf_source(i)].is_init());
  }
  // Minimality: every proper prefix is SC-consistent.
  for (const auto& mask : all_prefix_sets(w)) {
    size_t kept = 0;
    for (bool b : mask) kept += b;
    if (kept == static_cast<size_t>(w.size())) continue;
    CHECK(consistent(restrict_to_prefix(w, mask), ModelId::SC));
  }
}

TEST_CASE("spinlock client is robust under the weak models") {
  Program p = corpus_program("spinlock_client.lit");
  ExplorationBounds b;
  b.max_events_per_thread = 10;
  for (ModelId m : {ModelId::TSO, ModelId::RA, ModelId::StrongCOH}) {
    CAPTURE(model_name(m));
    CHECK(check_finite_robustness(p, m, b).robust);
  }
}

TEST_CASE("robustness transfer: robust programs have equal behavior sets") {
  ExplorationBounds b;
  b.max_events_per_thread = 10;
  for (const char* f : {"spinlock_client.lit", "2rmw.lit"}) {
    CAPTURE(f);
    Program p = corpus_program(f);
    for (ModelId m : {ModelId::TSO, ModelId::RA, ModelId::StrongCOH}) {
      CAPTURE(model_name(m));
      REQUIRE(check_finite_robustness(p, m, b).robust);
      auto weak = enumerate_consistent_graphs(p, m, b, BoundMode::Clip)
                      .behaviors(p.thread_count());
      auto sc = enumerate_consistent_graphs(p, ModelId::SC, b, BoundMode::Clip)
                    .behaviors(p.thread_count());
      CHECK(weak == sc);
    }
  }
}

TEST_CASE("prefix closedness of all four predicates on sampled prefixes") {
  for (const char* f : {"sb.lit", "mp.lit", "sb_rmws.lit"}) {
    CAPTURE(f);
    Program p = corpus_program(f);
    for (ModelId m : kAllModels) {
      CAPTURE(model_name(m));
      auto res = enumerate_consistent_graphs(p, m, ExplorationBounds{});
      int sampled = 0;
      for (const auto* eg : res.complete()) {
        CHECK(check_prefix_closedness(eg->graph, m, 8, 1234 + sampled));
        if (++sampled >= 10) break;
      }
      CHECK(sampled > 0);
    }
  }
}

TEST_CASE("full and init-only prefixes are trivially consistent") {
  Program p = corpus_program("mp.lit");
  auto res = enumerate_consistent_graphs(p, ModelId::RA, ExplorationBounds{});
  REQUIRE_FALSE(res.complete().empty());
  const ExecutionGraph& g = res.complete()[0]->graph;
  std::vector<bool> all(g.size(), true);
  CHECK(consistent(restrict_to_prefix(g, all), ModelId::RA));
  std::vector<bool> init_only(g.size(), false);
  for (int i = 0; i < g.size(); ++i) init_only[i] = g.events[i].is_init();
  CHECK(consistent(restrict_to_prefix(g, init_only), ModelId::RA));
}
