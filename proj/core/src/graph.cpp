#include "memfair/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "memfair/errors.hpp"

namespace memfair {

bool event_canonical_less(const Event& a, const Event& b) {
  if (a.is_init() != b.is_init()) return a.is_init();
  if (a.is_init()) return a.lab.loc < b.lab.loc;
  if (a.tid != b.tid) return a.tid < b.tid;
  return a.sn < b.sn;
}

std::string Behavior::key() const {
  std::ostringstream os;
  for (const auto& seq : threads) {
    os << "|";
    for (const auto& l : seq)
      os << static_cast<int>(l.typ) << "," << l.loc << "," << l.val_r << ","
         << l.val_w << ";";
  }
  return os.str();
}

std::vector<int> ExecutionGraph::non_init_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!events[i].is_init()) out.push_back(i);
  return out;
}

std::vector<int> ExecutionGraph::writes_to(LocId x) const {
  std::vector<int> ws;
  for (int i = 0; i < size(); ++i)
    if (is_write(i) && loc_of(i) == x) ws.push_back(i);
  std::sort(ws.begin(), ws.end(), [&](int a, int b) { return mo.at(a, b); });
  return ws;
}

Relation ExecutionGraph::po() const {
  Relation r(size());
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b) {
      if (a == b) continue;
      const Event &ea = events[a], &eb = events[b];
      if (ea.is_init() && !eb.is_init())
        r.set(a, b);
      else if (!ea.is_init() && !eb.is_init() && ea.tid == eb.tid && ea.sn < eb.sn)
        r.set(a, b);
    }
  return r;
}

Relation ExecutionGraph::fr() const {
  Relation f = rf.inverse().compose(mo);
  for (int i = 0; i < size(); ++i) f.set(i, i, false);
  return f;
}

Relation ExecutionGraph::same_loc_pairs() const {
  Relation r(size());
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b)
      if (loc_of(a) == loc_of(b)) r.set(a, b);
  return r;
}

Relation ExecutionGraph::po_loc() const { return po() & same_loc_pairs(); }

int ExecutionGraph::rf_source(int r) const {
  for (int w = 0; w < size(); ++w)
    if (rf.at(w, r)) return w;
  return -1;
}

int ExecutionGraph::mo_maximal(LocId x) const {
  auto ws = writes_to(x);
  if (ws.empty()) throw Error(ErrorCode::Internal, "no writes to location");
  return ws.back();
}

std::string ExecutionGraph::key() const {
  std::ostringstream os;
  for (const auto& e : events)
    os << e.tid << "." << e.sn << "." << static_cast<int>(e.lab.typ) << "."
       << e.lab.loc << "." << e.lab.val_r << "." << e.lab.val_w << ";";
  os << "rf:";
  for (auto& [a, b] : rf.pairs()) os << a << ">" << b << ";";
  os << "mo:";
  for (auto& [a, b] : mo.pairs()) os << a << ">" << b << ";";
  return os.str();
}

Behavior ExecutionGraph::behavior(int thread_count) const {
  Behavior b;
  b.threads.resize(thread_count);
  // Events are canonical, so per-thread traversal is already in sn order.
  for (const auto& e : events)
    if (!e.is_init()) b.threads[e.tid - 1].push_back(e.lab);
  return b;
}

namespace {

int index_of(const std::vector<Event>& events, const Event& e) {
  for (int i = 0; i < static_cast<int>(events.size()); ++i) {
    const Event& x = events[i];
    if (x.is_init() != e.is_init()) continue;
    if (e.is_init()) {
      if (x.lab.loc == e.lab.loc) return i;
    } else if (x.tid == e.tid && x.sn == e.sn) {
      return i;
    }
  }
  throw Error(ErrorCode::Internal, "event not present in graph");
}

}  // namespace

ExecutionGraph make_graph(std::vector<std::string> locs, std::vector<Event> events,
                          const std::vector<std::pair<Event, Event>>& rf_pairs,
                          const std::vector<std::pair<Event, Event>>& mo_pairs) {
  ExecutionGraph g;
  g.locs = std::move(locs);
  g.events = std::move(events);
  std::sort(g.events.begin(), g.events.end(), event_canonical_less);
  g.rf = Relation(g.size());
  g.mo = Relation(g.size());
  for (auto& [w, r] : rf_pairs)
    g.rf.set(index_of(g.events, w), index_of(g.events, r));
  for (auto& [a, b] : mo_pairs)
    g.mo.set(index_of(g.events, a), index_of(g.events, b));
  return g;
}

std::vector<Event> events_of_behavior(const Behavior& b, int loc_count) {
  std::vector<Event> out;
  for (LocId x = 0; x < loc_count; ++x) out.push_back(Event::init(x));
  for (int t = 0; t < b.thread_count(); ++t)
    for (size_t k = 0; k < b.threads[t].size(); ++k)
      out.push_back(Event::make(t + 1, static_cast<int>(k), b.threads[t][k]));
  std::sort(out.begin(), out.end(), event_canonical_less);
  return out;
}

WellformedReport check_wellformed(const ExecutionGraph& g) {
  auto bad = [](const std::string& why) {
    return WellformedReport{false, why};
  };
  const int n = g.size();
  // Init coverage: exactly one W(x,0) init event per location.
  std::vector<int> init_count(g.locs.size(), 0);
  for (const auto& e : g.events) {
    if (!e.is_init()) continue;
    if (e.lab.typ != AccessType::W || e.lab.val_w != 0)
      return bad("init event is not a zero write");
    init_count[e.lab.loc] += 1;
  }
  for (size_t x = 0; x < g.locs.size(); ++x)
    if (init_count[x] != 1)
      return bad("missing or duplicate init event for location " + g.locs[x]);
  // (tid, sn) uniqueness and per-thread downward closure.
  std::map<Tid, std::set<int>> sns;
  for (const auto& e : g.events) {
    if (e.is_init()) continue;
    if (e.tid <= 0 || e.sn < 0) return bad("non-init event with bottom tid/sn");
    if (!sns[e.tid].insert(e.sn).second)
      return bad("duplicate (tid, sn) pair");
  }
  for (auto& [t, s] : sns)
    for (int k = 0; k < *s.rbegin(); ++k)
      if (!s.count(k))
        return bad("serial numbers of thread " + std::to_string(t) +
                   " are not downward closed");
  // rf conditions.
  std::vector<int> covered(n, 0);
  for (auto& [w, r] : g.rf.pairs()) {
    if (!g.is_write(w) || !g.is_read(r)) return bad("rf edge not write-to-read");
    if (g.loc_of(w) != g.loc_of(r)) return bad("rf edge changes location");
    if (g.events[w].lab.val_w != g.events[r].lab.val_r)
      return bad("rf edge value mismatch");
    covered[r] += 1;
  }
  for (int i = 0; i < n; ++i) {
    if (g.is_read(i) && covered[i] == 0)
      return bad("E \xe2\x88\xa9 R \xe2\x8a\x86 codom(rf) violated: uncovered read");
    if (covered[i] > 1) return bad("rf^-1 is not functional");
  }
  // mo: disjoint union of strict total orders per location on writes.
  for (auto& [a, b] : g.mo.pairs()) {
    if (!g.is_write(a) || !g.is_write(b)) return bad("mo edge not write-to-write");
    if (g.loc_of(a) != g.loc_of(b)) return bad("mo edge changes location");
  }
  for (size_t x = 0; x < g.locs.size(); ++x) {
    std::vector<int> ws;
    for (int i = 0; i < n; ++i)
      if (g.is_write(i) && g.loc_of(i) == static_cast<LocId>(x)) ws.push_back(i);
    for (int a : ws) {
      if (g.mo.at(a, a)) return bad("mo is not irreflexive");
      for (int b : ws) {
        if (a == b) continue;
        if (!g.mo.at(a, b) && !g.mo.at(b, a)) return bad("mo is not total per location");
        if (g.mo.at(a, b) && g.mo.at(b, a)) return bad("mo is not antisymmetric");
        for (int c : ws)
          if (g.mo.at(a, b) && g.mo.at(b, c) && !g.mo.at(a, c))
            return bad("mo is not transitive");
      }
    }
  }
  return {};
}

PrefixFiniteReport check_prefix_finite_bounded(const Relation& r,
                                               const std::vector<int>& universe,
                                               int n) {
  if (!r.acyclic()) throw Error(ErrorCode::Cyclic, "relation has a cycle");
  PrefixFiniteReport rep;
  for (int b : universe) rep.max_predecessors = std::max(rep.max_predecessors, r.in_degree(b));
  if (check_n_total(r, universe, n)) {
    rep.chain_law_checked = true;
    rep.chain_law_holds = r.power(2 * n + 1).subset_of(r.up_to_power(2 * n));
  }
  return rep;
}

bool check_n_total(const Relation& r, const std::vector<int>& universe, int n) {
  return r.n_total(universe, n);
}

ExecutionGraph restrict_to_prefix(const ExecutionGraph& g,
                                  const std::vector<bool>& keep) {
  const Relation porf = g.po() | g.rf;
  for (int b = 0; b < g.size(); ++b) {
    if (g.events[b].is_init() && !keep[b])
      throw Error(ErrorCode::NotPrefixClosed, "prefix must contain Init");
    if (!keep[b]) continue;
    for (int a = 0; a < g.size(); ++a)
      if (porf.at(a, b) && !keep[a])
        throw Error(ErrorCode::NotPrefixClosed,
                    "event set is not po-union-rf downward closed");
  }
  ExecutionGraph out;
  out.locs = g.locs;
  std::vector<int> remap(g.size(), -1);
  for (int i = 0; i < g.size(); ++i)
    if (keep[i]) {
      remap[i] = out.size();
      out.events.push_back(g.events[i]);
    }
  out.rf = Relation(out.size());
  out.mo = Relation(out.size());
  for (auto& [a, b] : g.rf.pairs())
    if (keep[a] && keep[b]) out.rf.set(remap[a], remap[b]);
  for (auto& [a, b] : g.mo.pairs())
    if (keep[a] && keep[b]) out.mo.set(remap[a], remap[b]);
  return out;
}

std::vector<std::vector<bool>> all_prefix_sets(const ExecutionGraph& g,
                                               size_t limit) {
  const Relation porf = (g.po() | g.rf).closure();
  std::vector<std::vector<bool>> out;
  std::set<std::vector<bool>> seen;
  std::vector<bool> full(g.size(), true);
  std::vector<std::vector<bool>> stack{full};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    out.push_back(cur);
    if (out.size() >= limit)
      throw Error(ErrorCode::Internal, "too many prefixes to enumerate");
    // Remove one maximal (w.r.t. po-union-rf) kept non-init event.
    for (int i = 0; i < g.size(); ++i) {
      if (!cur[i] || g.events[i].is_init()) continue;
      bool maximal = true;
      for (int j = 0; j < g.size(); ++j)
        if (cur[j] && j != i && porf.at(i, j)) maximal = false;
      if (!maximal) continue;
      auto next = cur;
      next[i] = false;
      stack.push_back(next);
    }
  }
  return out;
}

}  // namespace memfair
