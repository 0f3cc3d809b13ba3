#include "memfair/correspond.hpp"

#include <algorithm>
#include <map>

#include "memfair/errors.hpp"

namespace memfair {

namespace {

int max_tid(const ExecutionGraph& g) {
  int n = 1;
  for (const auto& e : g.events) n = std::max(n, static_cast<int>(e.tid));
  return n;
}

struct ObsStep {
  int idx;  // index into t.steps
  Tid tid;
  int sn;
  EventLabel lab;
  int read_msg, write_msg;
};

std::vector<ObsStep> obs_steps(const AnnotatedTrace& t) {
  std::vector<ObsStep> out;
  std::vector<int> sn(t.thread_count, 0);
  for (int i = 0; i < static_cast<int>(t.steps.size()); ++i) {
    const TransitionLabel& l = t.steps[i].t;
    if (l.kind != TransitionLabel::Kind::Obs) continue;
    out.push_back(ObsStep{i, l.tid, sn[l.tid - 1]++, l.lab, l.read_msg,
                          l.write_msg});
  }
  return out;
}

}  // namespace

ExecutionGraph sc_trace_to_graph(const AnnotatedTrace& t) {
  const int L = static_cast<int>(t.locs.size());
  std::vector<Event> events;
  for (LocId x = 0; x < L; ++x) events.push_back(Event::init(x));
  std::vector<Event> last_write(L);
  std::vector<std::vector<Event>> writes(L);
  for (LocId x = 0; x < L; ++x) {
    last_write[x] = Event::init(x);
    writes[x] = {Event::init(x)};
  }
  std::vector<std::pair<Event, Event>> rf, mo;
  for (const ObsStep& s : obs_steps(t)) {
    Event e = Event::make(s.tid, s.sn, s.lab);
    events.push_back(e);
    if (s.lab.is_read()) rf.emplace_back(last_write[s.lab.loc], e);
    if (s.lab.is_write()) {
      last_write[s.lab.loc] = e;
      writes[s.lab.loc].push_back(e);
    }
  }
  for (LocId x = 0; x < L; ++x)
    for (size_t i = 0; i < writes[x].size(); ++i)
      for (size_t j = i + 1; j < writes[x].size(); ++j)
        mo.emplace_back(writes[x][i], writes[x][j]);
  return make_graph(t.locs, std::move(events), rf, mo);
}

ExecutionGraph tso_trace_to_graph(const AnnotatedTrace& t) {
  const int L = static_cast<int>(t.locs.size());
  auto steps = obs_steps(t);

  // Match the k-th propagation of a thread with its k-th buffered write.
  std::map<int, int> vis;  // obs step idx -> visibility index
  std::vector<std::vector<int>> pending(t.thread_count);  // step idx queues
  for (const ObsStep& s : steps) {
    if (s.lab.typ == AccessType::W)
      pending[s.tid - 1].push_back(s.idx);
    else
      vis[s.idx] = s.idx;
  }
  std::vector<size_t> taken(t.thread_count, 0);
  for (int i = 0; i < static_cast<int>(t.steps.size()); ++i) {
    const TransitionLabel& l = t.steps[i].t;
    if (l.kind != TransitionLabel::Kind::PropTSO) continue;
    auto& q = pending[l.tid - 1];
    if (taken[l.tid - 1] >= q.size())
      throw Error(ErrorCode::Internal, "propagation without a buffered write");
    vis[q[taken[l.tid - 1]++]] = i;
  }
  for (Tid tid = 1; tid <= t.thread_count; ++tid)
    if (taken[tid - 1] < pending[tid - 1].size())
      throw Error(ErrorCode::UnpropagatedWrite,
                  "write of thread " + std::to_string(tid) +
                      " is never propagated");

  std::vector<Event> events;
  for (LocId x = 0; x < L; ++x) events.push_back(Event::init(x));
  std::vector<std::pair<Event, Event>> rf, mo;
  // Per location: (vis, event) including init at vis -1.
  std::vector<std::vector<std::pair<int, Event>>> wvis(L);
  for (LocId x = 0; x < L; ++x) wvis[x].emplace_back(-1, Event::init(x));
  for (const ObsStep& s : steps) {
    Event e = Event::make(s.tid, s.sn, s.lab);
    events.push_back(e);
    if (s.lab.is_write()) wvis[s.lab.loc].emplace_back(vis.at(s.idx), e);
  }
  for (LocId x = 0; x < L; ++x) {
    std::sort(wvis[x].begin(), wvis[x].end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < wvis[x].size(); ++i)
      for (size_t j = i + 1; j < wvis[x].size(); ++j)
        mo.emplace_back(wvis[x][i].second, wvis[x][j].second);
  }
  // rf: the latest same-thread write still buffered at the read, else the
  // latest write visible before the read.
  for (const ObsStep& s : steps) {
    if (!s.lab.is_read()) continue;
    Event r = Event::make(s.tid, s.sn, s.lab);
    const LocId x = s.lab.loc;
    const ObsStep* buffered = nullptr;
    for (const ObsStep& w : steps) {
      if (w.tid != s.tid || w.lab.typ != AccessType::W || w.lab.loc != x) continue;
      if (w.idx < s.idx && s.idx < vis.at(w.idx))
        if (!buffered || w.idx > buffered->idx) buffered = &w;
    }
    if (buffered) {
      rf.emplace_back(Event::make(buffered->tid, buffered->sn, buffered->lab), r);
      continue;
    }
    std::pair<int, Event> best{-1, Event::init(x)};
    for (const auto& [v, e] : wvis[x])
      if (v < s.idx && v >= best.first) best = {v, e};
    rf.emplace_back(best.second, r);
  }
  return make_graph(t.locs, std::move(events), rf, mo);
}

ExecutionGraph ra_trace_to_graph(const AnnotatedTrace& t) {
  const int L = static_cast<int>(t.locs.size());
  std::vector<Event> events;
  std::map<int, Event> msg_event;  // message id -> creating event
  for (LocId x = 0; x < L; ++x) {
    events.push_back(Event::init(x));
    msg_event.emplace(x, Event::init(x));
  }
  auto steps = obs_steps(t);
  std::vector<std::pair<Event, Event>> rf, mo;
  for (const ObsStep& s : steps) {
    Event e = Event::make(s.tid, s.sn, s.lab);
    events.push_back(e);
    if (s.lab.is_write()) {
      if (s.write_msg < 0)
        throw Error(ErrorCode::InconsistentInput,
                    "trace lacks message annotations");
      msg_event.emplace(s.write_msg, e);
    }
    if (s.lab.is_read()) {
      if (s.read_msg < 0)
        throw Error(ErrorCode::InconsistentInput,
                    "trace lacks message annotations");
      rf.emplace_back(msg_event.at(s.read_msg), e);
    }
  }
  const RAState& final_ra =
      t.steps.empty() ? t.initial.ra : t.steps.back().post.ra;
  for (LocId x = 0; x < L; ++x) {
    const auto& ord = final_ra.order[x];
    for (size_t i = 0; i < ord.size(); ++i)
      for (size_t j = i + 1; j < ord.size(); ++j)
        mo.emplace_back(msg_event.at(ord[i]), msg_event.at(ord[j]));
  }
  return make_graph(t.locs, std::move(events), rf, mo);
}

ExecutionGraph trace_to_graph(const AnnotatedTrace& t) {
  switch (t.model) {
    case ModelId::SC:
      return sc_trace_to_graph(t);
    case ModelId::TSO:
      return tso_trace_to_graph(t);
    case ModelId::RA:
    case ModelId::StrongCOH:
      return ra_trace_to_graph(t);
  }
  throw Error(ErrorCode::Internal, "bad model");
}

std::vector<int> enumerate_respecting(const ExecutionGraph& g,
                                      const Relation& r) {
  auto universe = g.non_init_indices();
  // Relation restricted to the universe, re-indexed.
  std::map<int, int> to_small;
  for (size_t i = 0; i < universe.size(); ++i) to_small[universe[i]] = i;
  Relation small(static_cast<int>(universe.size()));
  for (auto& [a, b] : r.pairs()) {
    auto ia = to_small.find(a), ib = to_small.find(b);
    if (ia != to_small.end() && ib != to_small.end() && ia->second != ib->second)
      small.set(ia->second, ib->second);
  }
  std::vector<int> order;
  for (int i : small.topo_order()) order.push_back(universe[i]);
  return order;
}

namespace {

class TraceBuilder {
 public:
  TraceBuilder(const ExecutionGraph& g, ModelId m)
      : g_(g), n_(max_tid(g)) {
    tr_.model = m;
    tr_.thread_count = n_;
    tr_.locs = g.locs;
    tr_.initial = machine_init(m, static_cast<int>(g.locs.size()), n_);
    cur_ = tr_.initial;
  }

  TransitionLabel& emit_obs(int ev, int read_msg = -1, int write_pos = -1) {
    TransitionLabel t;
    t.kind = TransitionLabel::Kind::Obs;
    t.tid = g_.events[ev].tid;
    t.lab = g_.events[ev].lab;
    t.read_msg = read_msg;
    t.ra_write_pos = write_pos;
    return push(t);
  }

  void emit_prop_tso(Tid tid) {
    TransitionLabel t;
    t.kind = TransitionLabel::Kind::PropTSO;
    t.tid = tid;
    push(t);
  }

  bool try_emit_prop_ra(Tid tid, int msg) {
    const RAMessage& m = cur_.ra.msgs[msg];
    if (cur_.ra.view_pos(tid, m.loc) >= cur_.ra.pos(m.loc, msg)) return false;
    TransitionLabel t;
    t.kind = TransitionLabel::Kind::PropRA;
    t.tid = tid;
    t.msg_id = msg;
    push(t);
    return true;
  }

  AnnotatedTrace take() { return std::move(tr_); }
  const MachineState& state() const { return cur_; }

 private:
  TransitionLabel& push(TransitionLabel t) {
    cur_ = machine_step(cur_, t);
    tr_.steps.push_back(AnnotatedStep{t, cur_});
    return tr_.steps.back().t;
  }

  const ExecutionGraph& g_;
  int n_;
  AnnotatedTrace tr_;
  MachineState cur_;
};

AnnotatedTrace sc_graph_to_trace(const ExecutionGraph& g) {
  DerivedRelations d = derived(g);
  TraceBuilder tb(g, ModelId::SC);
  for (int ev : enumerate_respecting(g, d.hb_sc)) tb.emit_obs(ev);
  return tb.take();
}

AnnotatedTrace tso_graph_to_trace(const ExecutionGraph& g) {
  DerivedRelations d = derived(g);
  TraceBuilder tb(g, ModelId::TSO);
  std::vector<bool> emitted(g.size(), false);
  auto order = enumerate_respecting(g, d.hb_tso);
  for (int ev : order) {
    const Event& e = g.events[ev];
    if (e.lab.typ == AccessType::Rmw) {
      tb.emit_obs(ev);
    } else if (e.lab.typ == AccessType::R) {
      // Issue the thread's unexecuted program-order-prior writes first.
      for (int w : order) {
        if (emitted[w] || g.events[w].tid != e.tid) continue;
        if (g.events[w].lab.typ != AccessType::W) continue;
        if (g.events[w].sn < e.sn) {
          tb.emit_obs(w);
          emitted[w] = true;
        }
      }
      tb.emit_obs(ev);
    } else {
      if (!emitted[ev]) {
        tb.emit_obs(ev);
        emitted[ev] = true;
      }
      tb.emit_prop_tso(e.tid);
    }
  }
  return tb.take();
}

AnnotatedTrace ra_graph_to_trace(const ExecutionGraph& g, ModelId m) {
  DerivedRelations d = derived(g);
  const int N = max_tid(g);
  auto order = enumerate_respecting(g, d.po | d.rf);
  const int steps = static_cast<int>(order.size());
  std::vector<int> order_pos(g.size(), -1);
  for (int i = 0; i < steps; ++i) order_pos[order[i]] = i;

  // Timestamps are mo ranks, dense per location (init = 0); reads take the
  // rank of their source.
  std::vector<int> tmap(g.size(), -1);
  for (size_t x = 0; x < g.locs.size(); ++x) {
    auto ws = g.writes_to(static_cast<LocId>(x));
    for (size_t i = 0; i < ws.size(); ++i) tmap[ws[i]] = static_cast<int>(i);
  }
  for (int r = 0; r < g.size(); ++r)
    if (g.is_read(r) && !g.is_rmw(r)) tmap[r] = tmap[g.rf_source(r)];

  // safepoints(w): events with no hb-first step (reflexively) into a
  // same-location event of smaller timestamp, nor into w itself.
  // StrongCOH uses rf?;po? instead of hb_ra? since its reads do not
  // acquire the message view.
  Relation reach(g.size());
  if (m == ModelId::RA) {
    reach = d.hb_ra;
  } else {
    Relation id(g.size());
    for (int i = 0; i < g.size(); ++i) id.set(i, i);
    reach = (d.rf | id).compose(d.po | id);
  }
  auto in_safepoints = [&](int e, int w) {
    auto bad = [&](int tgt) {
      return tgt == w || (g.loc_of(tgt) == g.loc_of(w) && tmap[tgt] >= 0 &&
                          tmap[tgt] < tmap[w]);
    };
    if (bad(e)) return false;
    for (int tgt = 0; tgt < g.size(); ++tgt)
      if (reach.at(e, tgt) && bad(tgt)) return false;
    return true;
  };

  // tslot(tid, w): first enumeration index from which every later event of
  // the thread is a safe point for w.
  std::vector<std::vector<int>> tslot(N + 1, std::vector<int>(g.size(), -1));
  for (Tid tid = 1; tid <= N; ++tid) {
    bool has_events = false;
    for (const auto& e : g.events) has_events |= e.tid == tid;
    if (!has_events) continue;
    for (int w = 0; w < g.size(); ++w) {
      if (!g.is_write(w) || g.events[w].is_init()) continue;
      int last_unsafe = -1;
      for (int j = 0; j < steps; ++j)
        if (g.events[order[j]].tid == tid && !in_safepoints(order[j], w))
          last_unsafe = j;
      tslot[tid][w] = std::max(order_pos[w], last_unsafe);
    }
  }

  TraceBuilder tb(g, m);
  std::vector<int> msg_of(g.size(), -1);
  for (size_t x = 0; x < g.locs.size(); ++x) msg_of[x] = static_cast<int>(x);
  // Init events occupy indices 0..L-1 in canonical order; their messages
  // carry the same ids by machine_init's construction.
  for (int i = 0; i < steps; ++i) {
    const int ev = order[i];
    const Event& e = g.events[ev];
    int read_msg = -1, write_pos = -1;
    if (e.lab.is_read()) read_msg = msg_of[g.rf_source(ev)];
    if (e.lab.typ == AccessType::W) {
      // Insertion position: messages already present with smaller rank.
      int pos = 0;
      const auto& ord = tb.state().ra.order[e.lab.loc];
      for (int id : ord) {
        int src = -1;
        for (int k = 0; k < g.size(); ++k)
          if (msg_of[k] == id) src = k;
        if (src >= 0 && tmap[src] < tmap[ev]) ++pos;
      }
      write_pos = pos;
    }
    TransitionLabel& done = tb.emit_obs(ev, read_msg, write_pos);
    if (done.write_msg >= 0) msg_of[ev] = done.write_msg;
    // Propagate every message whose slot this is, coalesced per
    // (thread, location) keeping only the largest timestamp.
    std::map<std::pair<Tid, LocId>, int> due;
    for (Tid tid = 1; tid <= N; ++tid)
      for (int w = 0; w < g.size(); ++w) {
        if (tslot[tid][w] != i) continue;
        auto key = std::make_pair(tid, g.loc_of(w));
        auto it = due.find(key);
        if (it == due.end() || tmap[w] > tmap[it->second]) due[key] = w;
      }
    for (auto& [key, w] : due) tb.try_emit_prop_ra(key.first, msg_of[w]);
  }
  return tb.take();
}

}  // namespace

AnnotatedTrace graph_to_fair_trace(const ExecutionGraph& g, ModelId m) {
  if (!consistent(g, m))
    throw Error(ErrorCode::InconsistentInput,
                "graph is not consistent under the requested model");
  switch (m) {
    case ModelId::SC:
      return sc_graph_to_trace(g);
    case ModelId::TSO:
      return tso_graph_to_trace(g);
    case ModelId::RA:
    case ModelId::StrongCOH:
      return ra_graph_to_trace(g, m);
  }
  throw Error(ErrorCode::Internal, "bad model");
}

}  // namespace memfair
