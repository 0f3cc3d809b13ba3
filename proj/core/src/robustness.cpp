#include "memfair/robustness.hpp"

#include <algorithm>
#include <random>

#include "memfair/errors.hpp"

namespace memfair {

namespace {

// Smallest po-union-rf prefix that is still SC-inconsistent. Exact via
// the prefix lattice on small graphs; larger witnesses are shrunk by
// restricting to the ancestors of a violating cycle until that stops
// making progress.
ExecutionGraph minimize_witness(const ExecutionGraph& g0) {
  ExecutionGraph g = g0;
  if (static_cast<int>(g.non_init_indices().size()) > 18) {
    while (true) {
      auto verdict = is_consistent(g, ModelId::SC);
      if (verdict.consistent) break;  // unreachable for a witness
      const Relation anc = (g.po() | g.rf).closure();
      std::vector<bool> keep(g.size(), false);
      for (int i = 0; i < g.size(); ++i) {
        if (g.events[i].is_init()) keep[i] = true;
        for (int c : verdict.cycle)
          if (i == c || anc.at(i, c)) keep[i] = true;
      }
      if (std::all_of(keep.begin(), keep.end(), [](bool b) { return b; })) break;
      g = restrict_to_prefix(g, keep);
    }
    return g;
  }
  auto prefixes = all_prefix_sets(g);
  std::vector<ExecutionGraph> bad;
  for (const auto& mask : prefixes) {
    ExecutionGraph sub = restrict_to_prefix(g, mask);
    if (!consistent(sub, ModelId::SC)) bad.push_back(std::move(sub));
  }
  // Minimum size, then canonical key; by construction no strict prefix of
  // the winner is SC-inconsistent.
  std::sort(bad.begin(), bad.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.key() < b.key();
  });
  return bad.front();
}

}  // namespace

RobustnessVerdict check_finite_robustness(const Program& p, ModelId m,
                                          const ExplorationBounds& b,
                                          int workers) {
  // Clip mode records exploration leaves, so together with completed runs
  // every reachable consistent graph is a prefix of some recorded one;
  // SC-consistency of prefixes follows from SC-consistency of the
  // recorded graphs.
  EnumerationResult res =
      enumerate_consistent_graphs(p, m, b, BoundMode::Clip, workers);
  RobustnessVerdict v;
  v.stats = res.stats;
  for (const auto& eg : res.graphs) {
    if (consistent(eg.graph, ModelId::SC)) continue;
    v.robust = false;
    v.witness = minimize_witness(eg.graph);
    return v;
  }
  return v;
}

bool check_prefix_closedness(const ExecutionGraph& g, ModelId m, int samples,
                             std::uint64_t seed) {
  if (!consistent(g, m))
    throw Error(ErrorCode::InconsistentInput, "graph must be consistent");
  std::mt19937_64 rng(seed);
  const Relation porf = (g.po() | g.rf).closure();
  for (int s = 0; s < samples; ++s) {
    std::vector<bool> keep(g.size(), true);
    // Peel a random number of maximal events off the prefix.
    const int peel = static_cast<int>(rng() % (g.non_init_indices().size() + 1));
    for (int k = 0; k < peel; ++k) {
      std::vector<int> maximal;
      for (int i = 0; i < g.size(); ++i) {
        if (!keep[i] || g.events[i].is_init()) continue;
        bool is_max = true;
        for (int j = 0; j < g.size(); ++j)
          if (keep[j] && j != i && porf.at(i, j)) is_max = false;
        if (is_max) maximal.push_back(i);
      }
      if (maximal.empty()) break;
      keep[maximal[rng() % maximal.size()]] = false;
    }
    if (!consistent(restrict_to_prefix(g, keep), m)) return false;
  }
  return true;
}

}  // namespace memfair
