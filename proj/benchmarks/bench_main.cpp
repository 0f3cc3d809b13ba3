#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "memfair/correspond.hpp"
#include "memfair/enumerate.hpp"
#include "memfair/parser.hpp"
#include "memfair/termination.hpp"

using namespace memfair;

namespace {

std::string corpus(const std::string& name) {
  std::ifstream in(std::string(MEMFAIR_CORPUS_DIR) + "/" + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void BM_Parse(benchmark::State& state) {
  std::string src = corpus("mcs_client.lit");
  for (auto _ : state) benchmark::DoNotOptimize(parse_program(src));
}
BENCHMARK(BM_Parse);

void BM_EnumerateSB(benchmark::State& state) {
  Program p(parse_program(corpus("sb.lit")));
  ModelId m = static_cast<ModelId>(state.range(0));
  for (auto _ : state) {
    auto res = enumerate_consistent_graphs(p, m, ExplorationBounds{});
    benchmark::DoNotOptimize(res.graphs.size());
  }
}
BENCHMARK(BM_EnumerateSB)->DenseRange(0, 3);

void BM_EnumerateSpinlock(benchmark::State& state) {
  Program p(parse_program(corpus("spinlock_client.lit")));
  ExplorationBounds b;
  b.max_events_per_thread = 32;
  b.spin_cap = 1;
  ModelId m = static_cast<ModelId>(state.range(0));
  for (auto _ : state) {
    auto res = enumerate_consistent_graphs(p, m, b);
    benchmark::DoNotOptimize(res.graphs.size());
  }
}
BENCHMARK(BM_EnumerateSpinlock)->DenseRange(0, 3);

void BM_Consistency(benchmark::State& state) {
  Program p(parse_program(corpus("mp.lit")));
  auto res = enumerate_consistent_graphs(p, ModelId::StrongCOH,
                                         ExplorationBounds{});
  for (auto _ : state)
    for (const auto* g : res.complete())
      benchmark::DoNotOptimize(is_consistent(g->graph, ModelId::TSO));
}
BENCHMARK(BM_Consistency);

void BM_RoundTripTSO(benchmark::State& state) {
  Program p(parse_program(corpus("sb.lit")));
  auto res = enumerate_consistent_graphs(p, ModelId::TSO, ExplorationBounds{});
  for (auto _ : state)
    for (const auto* g : res.complete()) {
      AnnotatedTrace tr = graph_to_fair_trace(g->graph, ModelId::TSO);
      benchmark::DoNotOptimize(trace_to_graph(tr).size());
    }
}
BENCHMARK(BM_RoundTripTSO);

void BM_TerminateMcs(benchmark::State& state) {
  Program p(parse_program(corpus("mcs_client_nofence.lit")));
  ExplorationBounds b;
  b.max_events_per_thread = 64;
  for (auto _ : state) {
    auto v = analyze_termination(p, ModelId::StrongCOH, b);
    benchmark::DoNotOptimize(v.outcome);
  }
}
BENCHMARK(BM_TerminateMcs);

}  // namespace

BENCHMARK_MAIN();
