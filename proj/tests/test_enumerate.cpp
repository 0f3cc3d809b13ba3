#include "doctest.h"
#include "memfair/enumerate.hpp"
#include "memfair/errors.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace memfair;
using namespace memfair::testing;

TEST_CASE("one writer one reader under SC gives exactly two graphs") {
  // Oracle first: all rf/mo assignments filtered by SC consistency agree.
  Program p(parse_program(
      "locations x; thread 1 { store(x, 1); halt; } "
      "thread 2 { a = load(x); halt; }"));
  ExplorationBounds b;
  auto res = enumerate_consistent_graphs(p, ModelId::SC, b);
  auto keys = complete_keys(res);
  auto oracle = naive_consistent_graph_keys(p, ModelId::SC, {0, 1}, 4);
  CHECK(keys == oracle);
  CHECK(keys.size() == 2);  // read from init or from the write
}

TEST_CASE("single thread read has one graph") {
  Program p(parse_program("locations x; thread 1 { a = load(x); halt; }"));
  auto res = enumerate_consistent_graphs(p, ModelId::SC, ExplorationBounds{});
  CHECK(res.complete().size() == 1);
  CHECK(res.complete()[0]->final_regs[0][0] == 0);
}

TEST_CASE("oracle equivalence on small programs, all four models") {
  // Naive generate-all-(rf,mo)-then-filter equals the search, set-wise.
  const char* programs[] = {
      // store buffering (4 events)
      "locations x y; thread 1 { store(x, 1); a = load(y); halt; } "
      "thread 2 { store(y, 1); b = load(x); halt; }",
      // message passing (4 events)
      "locations x y; thread 1 { store(x, 1); store(y, 1); halt; } "
      "thread 2 { a = load(y); b = load(x); halt; }",
      // two RMWs (2 events)
      "locations x; thread 1 { a = FADD(x, 1); halt; } "
      "thread 2 { b = FADD(x, 1); halt; }",
      // CAS against a plain write (3 events)
      "locations x; thread 1 { c = CAS(x, 0, 2); halt; } "
      "thread 2 { store(x, 1); d = load(x); halt; }",
      // swap and two reads (4 events)
      "locations x y; thread 1 { s = SWAP(x, 1); a = load(y); halt; } "
      "thread 2 { store(y, 1); b = load(x); halt; }",
      // write-write coherence (4 events)
      "locations x; thread 1 { store(x, 1); a = load(x); halt; } "
      "thread 2 { store(x, 2); b = load(x); halt; }",
  };
  for (const char* src : programs) {
    CAPTURE(src);
    Program p(parse_program(src));
    for (ModelId m : kAllModels) {
      CAPTURE(model_name(m));
      auto res = enumerate_consistent_graphs(p, m, ExplorationBounds{});
      auto oracle = naive_consistent_graph_keys(p, m, {0, 1, 2, 3}, 6);
      CHECK(complete_keys(res) == oracle);
    }
  }
}

TEST_CASE("monotonicity in model strength") {
  for (const char* f : {"sb.lit", "mp.lit", "2rmw.lit", "sb_rmws.lit"}) {
    CAPTURE(f);
    Program p = corpus_program(f);
    ExplorationBounds b;
    auto sc = complete_keys(enumerate_consistent_graphs(p, ModelId::SC, b));
    auto tso = complete_keys(enumerate_consistent_graphs(p, ModelId::TSO, b));
    auto ra = complete_keys(enumerate_consistent_graphs(p, ModelId::RA, b));
    auto coh =
        complete_keys(enumerate_consistent_graphs(p, ModelId::StrongCOH, b));
    CHECK(std::includes(tso.begin(), tso.end(), sc.begin(), sc.end()));
    CHECK(std::includes(ra.begin(), ra.end(), sc.begin(), sc.end()));
    CHECK(std::includes(coh.begin(), coh.end(), tso.begin(), tso.end()));
    CHECK(std::includes(coh.begin(), coh.end(), ra.begin(), ra.end()));
  }
}

TEST_CASE("enumeration is deterministic and worker-count independent") {
  Program p = corpus_program("mp.lit");
  ExplorationBounds b;
  auto one = complete_keys(enumerate_consistent_graphs(p, ModelId::TSO, b));
  auto again = complete_keys(enumerate_consistent_graphs(p, ModelId::TSO, b));
  auto parallel = complete_keys(
      enumerate_consistent_graphs(p, ModelId::TSO, b, BoundMode::Strict, 4));
  CHECK(one == again);
  CHECK(one == parallel);
}

TEST_CASE("check_outcome litmus verdicts") {
  Program sb = corpus_program("sb.lit");
  Assertion a00 = parse_assertion("a = 0 && b = 0", sb.source());
  ExplorationBounds b;
  CHECK_FALSE(check_outcome(sb, ModelId::SC, a00, b).allowed);
  auto tso = check_outcome(sb, ModelId::TSO, a00, b);
  CHECK(tso.allowed);
  REQUIRE(tso.witness.has_value());
  CHECK(consistent(tso.witness->graph, ModelId::TSO));
  CHECK_FALSE(consistent(tso.witness->graph, ModelId::SC));
  // A value that is never written is forbidden everywhere.
  Assertion a7 = parse_assertion("a = 7", sb.source());
  for (ModelId m : kAllModels)
    CHECK_FALSE(check_outcome(sb, m, a7, b).allowed);
}

TEST_CASE("bound errors and clip mode") {
  Program p = corpus_program("wwrloop.lit");
  ExplorationBounds b;
  b.max_events_per_thread = 6;
  CHECK_THROWS_AS(
      enumerate_consistent_graphs(p, ModelId::SC, b, BoundMode::Strict), Error);
  auto res = enumerate_consistent_graphs(p, ModelId::SC, b, BoundMode::Clip);
  CHECK(res.complete().empty());
  CHECK(res.stats.clipped > 0);
  for (const auto& eg : res.graphs) {
    CHECK(eg.status == GraphStatus::Clipped);
    CHECK(consistent(eg.graph, ModelId::SC));
  }
}

TEST_CASE("every enumerated graph re-validates against the reference checker") {
  for (const char* f : {"sb.lit", "2rmw.lit", "rloop.lit"}) {
    Program p = corpus_program(f);
    ExplorationBounds b;
    b.max_events_per_thread = 5;
    for (ModelId m : kAllModels) {
      CAPTURE(f);
      CAPTURE(model_name(m));
      auto res = enumerate_consistent_graphs(p, m, b, BoundMode::Clip);
      CHECK(!res.graphs.empty());
      for (const auto& eg : res.graphs) {
        CHECK(check_wellformed(eg.graph).ok);
        CHECK(consistent(eg.graph, m));
      }
    }
  }
}
