#include "memfair/enumerate.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <future>
#include <map>
#include <sstream>
#include <unordered_set>

#include "memfair/errors.hpp"

namespace memfair {

std::vector<const EnumeratedGraph*> EnumerationResult::complete() const {
  std::vector<const EnumeratedGraph*> out;
  for (const auto& g : graphs)
    if (g.status == GraphStatus::Complete) out.push_back(&g);
  return out;
}

std::vector<Behavior> EnumerationResult::behaviors(int thread_count) const {
  std::vector<Behavior> out;
  for (const auto* g : complete()) out.push_back(g->graph.behavior(thread_count));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct DigestHash {
  size_t operator()(unsigned __int128 v) const {
    return static_cast<size_t>(v ^ (v >> 64));
  }
};

// Graph under construction. Event ids ("gids") are 0..L-1 for the init
// writes and then creation order; mo is kept as per-location ordered
// sequences of write gids with init at position 0.
struct Node {
  ProgState ps;
  std::vector<Event> events;           // non-init, in creation order
  std::vector<int> rf_src;             // per created event: source gid or -1
  std::vector<std::vector<int>> mo;    // per location: gids

  // 128-bit state identity used for the visited set. Two states hashing
  // equal are treated as one; at the explored scales the collision
  // probability is vanishingly small, and all recorded graphs are still
  // rebuilt and deduplicated exactly.
  unsigned __int128 digest() const {
    std::uint64_t h1 = 0x243f6a8885a308d3ULL, h2 = 0x13198a2e03707344ULL;
    auto put = [&](std::uint64_t v) {
      h1 ^= v + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2);
      h2 = (h2 + v) * 0xbf58476d1ce4e5b9ULL;
      h2 ^= h2 >> 27;
    };
    for (const auto& ts : ps.threads) {
      put(ts.pc);
      put(ts.events);
      put(ts.cur_loop);
      put(ts.full_iters);
      put(ts.iter_start_sn);
      put(ts.last_iter_begin);
      put(ts.last_iter_end);
      for (Value v : ts.regs) put(static_cast<std::uint64_t>(v));
      put(~0ULL);
    }
    for (size_t i = 0; i < events.size(); ++i) {
      const Event& e = events[i];
      put(e.tid);
      put(static_cast<int>(e.lab.typ));
      put(e.lab.loc);
      put(static_cast<std::uint64_t>(e.lab.val_r));
      put(static_cast<std::uint64_t>(e.lab.val_w));
      put(rf_src[i] + 1);
    }
    put(~1ULL);
    for (const auto& seq : mo) {
      for (int g : seq) put(g);
      put(~2ULL);
    }
    return (static_cast<unsigned __int128>(h1) << 64) | h2;
  }
};

// A candidate extension of a node by one event.
struct Branch {
  Tid tid = 0;
  EventLabel lab;
  int rf_gid = -1;
  int mo_pos = -1;  // insertion position for writes
};

// Prefix consistency specialized for the enumerator: the parent's
// relations are loaded once as bit matrices over gids, and each candidate
// event is checked on a scratch copy before any node is materialized.
// For axioms whose closure base only gains edges incident to the new
// event, acyclicity of the (consistent) parent reduces the check to "is
// the new event on a cycle"; ra_loc also gains derived same-location
// hb edges between old events, so there the full closure is recomputed.
class FastCheck {
 public:
  static constexpr int kMaxEvents = 192;
  static constexpr int kWords = kMaxEvents / 64;

  void load_parent(const Program& p, ModelId m, const Node& node) {
    m_ = m;
    L_ = p.loc_count();
    n_ = L_ + static_cast<int>(node.events.size()) + 1;  // room for the child
    if (n_ > kMaxEvents)
      throw Error(ErrorCode::BoundExceeded, "graph too large for exploration");
    words_ = (n_ + 63) / 64;
    e_ = n_ - 1;

    labs_.resize(n_);
    tids_.assign(n_, 0);
    for (int g = 0; g < L_; ++g) labs_[g] = EventLabel::make_write(g, 0);
    for (size_t i = 0; i < node.events.size(); ++i) {
      labs_[L_ + i] = node.events[i].lab;
      tids_[L_ + i] = node.events[i].tid;
    }

    clear(po_);
    clear(rf_);
    clear(mo_);
    clear(fr_);
    reads_.clear();
    for (int b = L_; b < e_; ++b) {
      for (int a = 0; a < L_; ++a) set(po_, a, b);
      for (int a = L_; a < b; ++a) {
        if (tids_[a] != tids_[b]) continue;
        // Creation order within a thread follows serial numbers.
        set(po_, a, b);
      }
    }
    for (int b = L_; b < e_; ++b) {
      int src = node.rf_src[b - L_];
      if (src >= 0) {
        set(rf_, src, b);
        if (labs_[b].is_read()) reads_.push_back({b, src});
      }
    }
    for (const auto& seq : node.mo)
      for (size_t i = 0; i < seq.size(); ++i)
        for (size_t j = i + 1; j < seq.size(); ++j)
          set(mo_, seq[i], seq[j]);
    for (auto& [r, src] : reads_) {
      or_row(fr_, r, mo_, src);
      unset(fr_, r, r);
    }
  }

  bool branch_consistent(const Node& node, const Branch& br) {
    // Scratch = parent plus the candidate's edges.
    copy(dpo_, po_);
    copy(drf_, rf_);
    copy(dmo_, mo_);
    copy(dfr_, fr_);
    labs_[e_] = br.lab;
    tids_[e_] = br.tid;
    for (int a = 0; a < L_; ++a) set(dpo_, a, e_);
    for (int a = L_; a < e_; ++a)
      if (tids_[a] == br.tid) set(dpo_, a, e_);
    if (br.lab.is_read() && br.rf_gid >= 0) set(drf_, br.rf_gid, e_);
    if (br.lab.is_write()) {
      const auto& seq = node.mo[br.lab.loc];
      const int pos = br.mo_pos < 0 ? static_cast<int>(seq.size()) : br.mo_pos;
      for (int i = 0; i < static_cast<int>(seq.size()); ++i) {
        if (i < pos)
          set(dmo_, seq[i], e_);
        else
          set(dmo_, e_, seq[i]);
      }
      // Old reads of mo-predecessors now have the new write as an
      // fr-successor.
      for (auto& [r, src] : reads_)
        if (labs_[src].loc == br.lab.loc && test(dmo_, src, e_))
          set(dfr_, r, e_);
    }
    if (br.lab.is_read() && br.rf_gid >= 0) {
      or_row(dfr_, e_, dmo_, br.rf_gid);
      unset(dfr_, e_, e_);
    }

    switch (m_) {
      case ModelId::SC:
        for (int a = 0; a < n_; ++a)
          for (int w = 0; w < words_; ++w)
            row(u1_, a)[w] = row(dpo_, a)[w] | row(drf_, a)[w] |
                             row(dmo_, a)[w] | row(dfr_, a)[w];
        return !on_cycle(u1_, e_);
      case ModelId::TSO: {
        std::uint64_t plain_reads[kWords] = {};
        for (int b = 0; b < n_; ++b)
          if (labs_[b].typ == AccessType::R) plain_reads[b >> 6] |= bit(b);
        for (int a = 0; a < n_; ++a) {
          std::uint64_t* out = row(u1_, a);
          const std::uint64_t* po_a = row(dpo_, a);
          for (int w = 0; w < words_; ++w) {
            std::uint64_t ppo = po_a[w];
            if (labs_[a].typ == AccessType::W) ppo &= ~plain_reads[w];
            std::uint64_t rfe = row(drf_, a)[w] & ~po_a[w];
            out[w] = ppo | rfe | row(dmo_, a)[w] | row(dfr_, a)[w];
          }
        }
        if (on_cycle(u1_, e_)) return false;
        build_sc_loc(u2_);
        return !on_cycle(u2_, e_);
      }
      case ModelId::StrongCOH:
        for (int a = 0; a < n_; ++a)
          for (int w = 0; w < words_; ++w)
            row(u1_, a)[w] = row(dpo_, a)[w] | row(drf_, a)[w];
        if (on_cycle(u1_, e_)) return false;
        build_sc_loc(u2_);
        return !on_cycle(u2_, e_);
      case ModelId::RA: {
        for (int a = 0; a < n_; ++a)
          for (int w = 0; w < words_; ++w)
            row(u1_, a)[w] = row(dpo_, a)[w] | row(drf_, a)[w];
        closure(u1_);
        std::vector<std::array<std::uint64_t, kWords>> loc_mask(
            L_, std::array<std::uint64_t, kWords>{});
        for (int b = 0; b < n_; ++b)
          loc_mask[labs_[b].loc][b >> 6] |= bit(b);
        for (int a = 0; a < n_; ++a) {
          std::uint64_t* out = row(u2_, a);
          const auto& mask = loc_mask[labs_[a].loc];
          for (int w = 0; w < words_; ++w)
            out[w] = (row(u1_, a)[w] & mask[w]) | row(drf_, a)[w] |
                     row(dmo_, a)[w] | row(dfr_, a)[w];
        }
        closure(u2_);
        for (int a = 0; a < n_; ++a)
          if (test(u2_, a, a)) return false;
        return true;
      }
    }
    return true;
  }

 private:
  using Mat = std::uint64_t[kMaxEvents * kWords];

  static std::uint64_t bit(int b) { return std::uint64_t{1} << (b & 63); }
  std::uint64_t* row(Mat& m, int a) { return m + a * kWords; }
  const std::uint64_t* row(const Mat& m, int a) const { return m + a * kWords; }
  void clear(Mat& m) { std::fill_n(m, n_ * kWords, 0); }
  void copy(Mat& dst, const Mat& src) {
    std::copy_n(src, n_ * kWords, dst);
  }
  void set(Mat& m, int a, int b) { row(m, a)[b >> 6] |= bit(b); }
  void unset(Mat& m, int a, int b) { row(m, a)[b >> 6] &= ~bit(b); }
  bool test(const Mat& m, int a, int b) const {
    return (row(m, a)[b >> 6] >> (b & 63)) & 1u;
  }
  void or_row(Mat& dst, int a, const Mat& src, int b) {
    for (int w = 0; w < words_; ++w) row(dst, a)[w] |= row(src, b)[w];
  }

  void build_sc_loc(Mat& dst) {
    for (int a = 0; a < n_; ++a) {
      std::uint64_t* out = row(dst, a);
      const LocId xa = labs_[a].loc;
      for (int w = 0; w < words_; ++w) out[w] = 0;
      for (int b = 0; b < n_; ++b)
        if (labs_[b].loc == xa && test(dpo_, a, b)) out[b >> 6] |= bit(b);
      for (int w = 0; w < words_; ++w)
        out[w] |= row(drf_, a)[w] | row(dmo_, a)[w] | row(dfr_, a)[w];
    }
  }

  void closure(Mat& m) {
    for (int k = 0; k < n_; ++k)
      for (int a = 0; a < n_; ++a)
        if (test(m, a, k))
          for (int w = 0; w < words_; ++w) row(m, a)[w] |= row(m, k)[w];
  }

  bool on_cycle(const Mat& m, int e) {
    std::uint64_t reach[kWords] = {}, frontier[kWords];
    for (int w = 0; w < words_; ++w) reach[w] = row(m, e)[w];
    if ((reach[e >> 6] >> (e & 63)) & 1u) return true;
    std::copy_n(reach, kWords, frontier);
    while (true) {
      std::uint64_t next[kWords] = {};
      for (int w = 0; w < words_; ++w) {
        std::uint64_t f = frontier[w];
        while (f) {
          int b = w * 64 + std::countr_zero(f);
          f &= f - 1;
          for (int v = 0; v < words_; ++v) next[v] |= row(m, b)[v];
        }
      }
      bool grew = false;
      for (int w = 0; w < words_; ++w) {
        frontier[w] = next[w] & ~reach[w];
        if (frontier[w]) grew = true;
        reach[w] |= next[w];
      }
      if ((reach[e >> 6] >> (e & 63)) & 1u) return true;
      if (!grew) return false;
    }
  }

  ModelId m_ = ModelId::SC;
  int L_ = 0, n_ = 0, words_ = 0, e_ = 0;
  std::vector<EventLabel> labs_;
  std::vector<Tid> tids_;
  std::vector<std::pair<int, int>> reads_;  // (read gid, source gid)
  Mat po_, rf_, mo_, fr_;      // parent
  Mat dpo_, drf_, dmo_, dfr_;  // parent + candidate
  Mat u1_, u2_;
};

class Enumerator {
 public:
  Enumerator(const Program& p, ModelId m, const ExplorationBounds& b,
             BoundMode mode)
      : p_(p), m_(m), b_(b), mode_(mode) {}

  void explore_from(Node node) {
    cur_ = std::move(node);
    explore();
  }

  Node root() const {
    Node n;
    n.ps = p_.init_state();
    n.mo.resize(p_.loc_count());
    for (LocId x = 0; x < p_.loc_count(); ++x) n.mo[x] = {x};
    return n;
  }

  /// Children of a node as fresh nodes (used to partition work).
  std::vector<Node> root_children(const Node& node) {
    cur_ = node;
    std::vector<Node> out;
    for (const Branch& br : consistent_branches()) {
      Undo u;
      if (!apply(br, u)) continue;
      out.push_back(cur_);
      undo(u);
    }
    return out;
  }

  const Program& p_;
  ModelId m_;
  ExplorationBounds b_;
  BoundMode mode_;
  std::unordered_set<unsigned __int128, DigestHash> visited;
  std::map<std::string, EnumeratedGraph> results;
  EnumerationStats stats;

  ExecutionGraph to_graph(const Node& node) const {
    std::vector<Event> evs;
    for (LocId x = 0; x < p_.loc_count(); ++x) evs.push_back(Event::init(x));
    for (const auto& e : node.events) evs.push_back(e);
    std::vector<std::pair<Event, Event>> rf, mo;
    for (size_t i = 0; i < node.events.size(); ++i)
      if (node.rf_src[i] >= 0)
        rf.emplace_back(event_of(node, node.rf_src[i]), node.events[i]);
    for (const auto& seq : node.mo)
      for (size_t i = 0; i < seq.size(); ++i)
        for (size_t j = i + 1; j < seq.size(); ++j)
          mo.emplace_back(event_of(node, seq[i]), event_of(node, seq[j]));
    return make_graph(p_.locs(), std::move(evs), rf, mo);
  }

 private:
  struct Undo {
    Tid tid = 0;
    ThreadState saved;
    bool wrote = false;
    LocId loc = -1;
    int pos = -1;
  };

  FastCheck fast_;
  Node cur_;

  Event event_of(const Node& node, int gid) const {
    if (gid < p_.loc_count()) return Event::init(gid);
    return node.events[gid - p_.loc_count()];
  }

  Value val_of(const Node& node, int gid) const {
    return event_of(node, gid).lab.val_w;
  }

  int mo_pos(const Node& node, LocId x, int gid) const {
    const auto& seq = node.mo[x];
    for (int i = 0; i < static_cast<int>(seq.size()); ++i)
      if (seq[i] == gid) return i;
    throw Error(ErrorCode::Internal, "gid not in mo");
  }

  std::vector<Branch> consistent_branches() {
    std::vector<Branch> branches;
    for (Tid tid = 1; tid <= p_.thread_count(); ++tid) {
      if (p_.terminated(cur_.ps, tid)) continue;
      const ThreadState& ts = cur_.ps.threads[tid - 1];
      if (ts.events >= b_.max_events_per_thread) {
        if (mode_ == BoundMode::Strict && ts.cur_loop < 0)
          throw Error(ErrorCode::BoundExceeded,
                      "thread " + std::to_string(tid) + " needs more than " +
                          std::to_string(b_.max_events_per_thread) +
                          " events outside spinloops");
        continue;
      }
      auto pa = p_.pending(cur_.ps, tid);
      const auto& regs = ts.regs;
      const LocId x = pa->loc;
      using IOp = Instruction::Op;
      const auto& writes = cur_.mo[x];  // candidate rf sources, in mo order
      switch (pa->op) {
        case IOp::Store: {
          EventLabel l = p_.label_for(*pa, regs, 0);
          for (int pos = 1; pos <= static_cast<int>(writes.size()); ++pos)
            branches.push_back(Branch{tid, l, -1, pos});
          break;
        }
        case IOp::Load:
          for (int w : writes)
            branches.push_back(
                Branch{tid, p_.label_for(*pa, regs, val_of(cur_, w)), w, -1});
          break;
        case IOp::Fadd:
        case IOp::Swap:
          for (int w : writes)
            branches.push_back(
                Branch{tid, p_.label_for(*pa, regs, val_of(cur_, w)), w,
                       mo_pos(cur_, x, w) + 1});
          break;
        case IOp::Cas:
          for (int w : writes) {
            Value v = val_of(cur_, w);
            EventLabel l = p_.label_for(*pa, regs, v);
            branches.push_back(
                Branch{tid, l, w, l.is_rmw() ? mo_pos(cur_, x, w) + 1 : -1});
          }
          break;
        default:
          throw Error(ErrorCode::Internal, "unexpected pending access");
      }
    }
    if (branches.empty()) return branches;
    fast_.load_parent(p_, m_, cur_);
    std::vector<Branch> ok;
    ok.reserve(branches.size());
    for (const Branch& br : branches) {
      if (fast_.branch_consistent(cur_, br))
        ok.push_back(br);
      else
        stats.pruned_inconsistent += 1;
    }
    return ok;
  }

  bool apply(const Branch& br, Undo& u) {
    u.tid = br.tid;
    u.saved = cur_.ps.threads[br.tid - 1];
    u.wrote = false;
    const int sn = u.saved.events;
    p_.step_inplace(cur_.ps, br.tid, br.lab);
    if (b_.spin_cap > 0 &&
        cur_.ps.threads[br.tid - 1].full_iters > b_.spin_cap) {
      cur_.ps.threads[br.tid - 1] = u.saved;
      return false;  // beyond the per-visit iteration budget
    }
    const int gid = p_.loc_count() + static_cast<int>(cur_.events.size());
    cur_.events.push_back(Event::make(br.tid, sn, br.lab));
    cur_.rf_src.push_back(br.rf_gid);
    if (br.lab.is_write()) {
      auto& seq = cur_.mo[br.lab.loc];
      u.wrote = true;
      u.loc = br.lab.loc;
      u.pos = br.mo_pos < 0 ? static_cast<int>(seq.size()) : br.mo_pos;
      seq.insert(seq.begin() + u.pos, gid);
    }
    return true;
  }

  void undo(const Undo& u) {
    cur_.events.pop_back();
    cur_.rf_src.pop_back();
    if (u.wrote) cur_.mo[u.loc].erase(cur_.mo[u.loc].begin() + u.pos);
    cur_.ps.threads[u.tid - 1] = u.saved;
  }

  void record(GraphStatus status) {
    EnumeratedGraph eg;
    eg.graph = to_graph(cur_);
    eg.status = status;
    for (const auto& ts : cur_.ps.threads) eg.final_regs.push_back(ts.regs);
    if (status == GraphStatus::Stuck) {
      for (Tid t = 1; t <= p_.thread_count(); ++t) {
        if (p_.terminated(cur_.ps, t)) continue;
        const ThreadState& ts = cur_.ps.threads[t - 1];
        eg.stuck_threads.push_back(t);
        eg.stuck_iter_sns.emplace_back(ts.last_iter_begin, ts.last_iter_end);
      }
    }
    std::string k = std::to_string(static_cast<int>(status)) + eg.graph.key();
    results.emplace(std::move(k), std::move(eg));
  }

  void explore() {
    if (!visited.insert(cur_.digest()).second) {
      stats.memo_hits += 1;
      return;
    }
    stats.explored += 1;
    if (p_.all_terminated(cur_.ps)) {
      record(GraphStatus::Complete);
      return;
    }
    if (b_.spin_cap > 0) {
      bool all_blocked = true;
      for (Tid t = 1; t <= p_.thread_count(); ++t) {
        if (p_.terminated(cur_.ps, t)) continue;
        const ThreadState& ts = cur_.ps.threads[t - 1];
        if (!(p_.at_spinloop_head(cur_.ps, t) && ts.full_iters >= b_.spin_cap))
          all_blocked = false;
      }
      if (all_blocked) record(GraphStatus::Stuck);
    }
    bool stepped = false;
    for (const Branch& br : consistent_branches()) {
      Undo u;
      if (!apply(br, u)) continue;
      stepped = true;
      explore();
      undo(u);
    }
    if (!stepped && mode_ == BoundMode::Clip) {
      stats.clipped += 1;
      record(GraphStatus::Clipped);
    }
  }
};

EnumerationResult finalize(std::vector<Enumerator*> workers) {
  EnumerationResult res;
  std::map<std::string, EnumeratedGraph> merged;
  for (Enumerator* w : workers) {
    res.stats.explored += w->stats.explored;
    res.stats.pruned_inconsistent += w->stats.pruned_inconsistent;
    res.stats.memo_hits += w->stats.memo_hits;
    res.stats.clipped += w->stats.clipped;
    for (auto& [k, g] : w->results) merged.emplace(k, std::move(g));
  }
  for (auto& [k, g] : merged) res.graphs.push_back(std::move(g));
  return res;
}

}  // namespace

EnumerationResult enumerate_consistent_graphs(const Program& p, ModelId m,
                                              const ExplorationBounds& b,
                                              BoundMode mode, int workers) {
  Enumerator main(p, m, b, mode);
  Node root = main.root();
  if (workers <= 1) {
    main.explore_from(root);
    return finalize({&main});
  }
  // Fan the root's branches out over a small pool; each worker keeps its
  // own visited set, so merging only deduplicates results and the output
  // does not depend on the worker count.
  main.stats.explored += 1;
  auto kids = main.root_children(root);
  const int pool_size = std::min<int>(workers, static_cast<int>(kids.size()));
  if (pool_size <= 0) return finalize({&main});
  std::vector<std::unique_ptr<Enumerator>> pool;
  for (int w = 0; w < pool_size; ++w)
    pool.push_back(std::make_unique<Enumerator>(p, m, b, mode));
  std::vector<std::future<void>> futs;
  for (int w = 0; w < pool_size; ++w) {
    futs.push_back(std::async(std::launch::async, [&, w] {
      for (size_t i = w; i < kids.size(); i += pool_size)
        pool[w]->explore_from(kids[i]);
    }));
  }
  for (auto& f : futs) f.get();
  std::vector<Enumerator*> all{&main};
  for (auto& w : pool) all.push_back(w.get());
  return finalize(all);
}

Outcome check_outcome(const Program& p, ModelId m, const Assertion& a,
                      const ExplorationBounds& b, int workers) {
  EnumerationResult res =
      enumerate_consistent_graphs(p, m, b, BoundMode::Strict, workers);
  Outcome out;
  out.stats = res.stats;
  for (const auto* g : res.complete()) {
    if (a.eval(g->final_regs)) {
      out.allowed = true;
      out.witness = *g;
      break;
    }
  }
  return out;
}

}  // namespace memfair
