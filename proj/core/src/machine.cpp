#include "memfair/machine.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "memfair/errors.hpp"

namespace memfair {

int RAState::pos(LocId x, int id) const {
  const auto& v = order[x];
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (v[i] == id) return i;
  throw Error(ErrorCode::Internal, "message not in location order");
}

int RAState::view_pos(Tid t, LocId x) const { return pos(x, views[t - 1][x]); }

MachineState machine_init(ModelId m, int loc_count, int thread_count) {
  MachineState s;
  s.model = m;
  switch (m) {
    case ModelId::SC:
      s.sc.mem.assign(loc_count, 0);
      break;
    case ModelId::TSO:
      s.tso.mem.assign(loc_count, 0);
      s.tso.buffers.assign(thread_count, {});
      break;
    case ModelId::RA:
    case ModelId::StrongCOH: {
      std::vector<int> init_view(loc_count);
      for (LocId x = 0; x < loc_count; ++x) init_view[x] = x;
      for (LocId x = 0; x < loc_count; ++x) {
        RAMessage msg;
        msg.loc = x;
        msg.val = 0;
        msg.view = init_view;
        s.ra.msgs.push_back(std::move(msg));
        s.ra.order.push_back({x});
      }
      s.ra.views.assign(thread_count, init_view);
      break;
    }
  }
  return s;
}

std::string MachineState::key() const {
  std::ostringstream os;
  switch (model) {
    case ModelId::SC:
      os << "sc:";
      for (Value v : sc.mem) os << v << ",";
      break;
    case ModelId::TSO:
      os << "tso:";
      for (Value v : tso.mem) os << v << ",";
      for (const auto& b : tso.buffers) {
        os << "|";
        for (auto& [x, v] : b) os << x << ":" << v << ",";
      }
      break;
    case ModelId::RA:
    case ModelId::StrongCOH: {
      os << "ra:";
      auto put_view = [&](const std::vector<int>& view) {
        os << "[";
        for (LocId y = 0; y < static_cast<LocId>(ra.order.size()); ++y)
          os << ra.pos(y, view[y]) << ",";
        os << "]";
      };
      // Ids canonicalized as (location, position).
      for (LocId x = 0; x < static_cast<LocId>(ra.order.size()); ++x) {
        os << "|";
        for (int id : ra.order[x]) {
          const RAMessage& m = ra.msgs[id];
          os << m.val << (m.locked_to_pred ? "L" : "-");
          put_view(m.view);
        }
      }
      os << "#";
      for (const auto& tv : ra.views) put_view(tv);
      break;
    }
  }
  return os.str();
}

namespace {

[[noreturn]] void not_enabled(const std::string& why) {
  throw Error(ErrorCode::NotEnabled, why);
}

// Newest buffered value for x, if any.
std::optional<Value> buffer_lookup(const TSOState& s, Tid t, LocId x) {
  const auto& b = s.buffers[t - 1];
  for (auto it = b.rbegin(); it != b.rend(); ++it)
    if (it->first == x) return it->second;
  return std::nullopt;
}

void ra_join_view(const RAState& s, std::vector<int>& into,
                  const std::vector<int>& other) {
  for (LocId x = 0; x < static_cast<LocId>(into.size()); ++x)
    if (s.pos(x, other[x]) > s.pos(x, into[x])) into[x] = other[x];
}

// Read step of the RA family: locates the message, checks the view bound
// and applies the model's view update.
void ra_read(MachineState& s, Tid t, LocId x, Value v, int& msg_id) {
  RAState& ra = s.ra;
  if (msg_id < 0) {
    for (int i = ra.view_pos(t, x); i < static_cast<int>(ra.order[x].size()); ++i)
      if (ra.msgs[ra.order[x][i]].val == v) {
        msg_id = ra.order[x][i];
        break;
      }
  }
  if (msg_id < 0) not_enabled("no readable message with the requested value");
  const RAMessage& m = ra.msgs[msg_id];
  if (m.loc != x || m.val != v) not_enabled("message does not match label");
  if (ra.pos(x, msg_id) < ra.view_pos(t, x))
    not_enabled("message is below the thread's view");
  if (s.model == ModelId::RA) {
    ra_join_view(ra, ra.views[t - 1], m.view);
  } else {
    ra.views[t - 1][x] = msg_id;  // StrongCOH: timestamp only, no view join
  }
}

// Write step: inserts a message at position `p` of x's order (-1 appends)
// and publishes the writer's updated view on the message.
int ra_write(MachineState& s, Tid t, LocId x, Value v, int p, bool locked) {
  RAState& ra = s.ra;
  const int sz = static_cast<int>(ra.order[x].size());
  if (p < 0) p = sz;
  if (p <= ra.view_pos(t, x)) not_enabled("timestamp not above the thread's view");
  if (p < sz && ra.msgs[ra.order[x][p]].locked_to_pred)
    not_enabled("cannot place a message inside an RMW adjacency");
  int id = static_cast<int>(ra.msgs.size());
  RAMessage m;
  m.loc = x;
  m.val = v;
  m.locked_to_pred = locked;
  ra.views[t - 1][x] = id;
  m.view = ra.views[t - 1];
  ra.msgs.push_back(std::move(m));
  ra.order[x].insert(ra.order[x].begin() + p, id);
  return id;
}

}  // namespace

MachineState machine_step(const MachineState& s0, TransitionLabel& t,
                          const OperationalOptions& opt) {
  MachineState s = s0;
  if (t.kind == TransitionLabel::Kind::PropTSO) {
    if (s.model != ModelId::TSO) not_enabled("prop(tid) is a TSO transition");
    auto& b = s.tso.buffers[t.tid - 1];
    if (b.empty()) not_enabled("store buffer is empty");
    auto [x, v] = b.front();
    b.pop_front();
    s.tso.mem[x] = v;
    return s;
  }
  if (t.kind == TransitionLabel::Kind::PropRA) {
    if (s.model != ModelId::RA && s.model != ModelId::StrongCOH)
      not_enabled("prop(tid, msg) is an RA/StrongCOH transition");
    const RAMessage& m = s.ra.msgs[t.msg_id];
    if (s.ra.view_pos(t.tid, m.loc) >= s.ra.pos(m.loc, t.msg_id))
      not_enabled("message already observed by the thread");
    s.ra.views[t.tid - 1][m.loc] = t.msg_id;
    return s;
  }

  const EventLabel& l = t.lab;
  const LocId x = l.loc;
  switch (s.model) {
    case ModelId::SC:
      if (l.is_read() && s.sc.mem[x] != l.val_r)
        not_enabled("memory does not hold the read value");
      if (l.is_write()) s.sc.mem[x] = l.val_w;
      break;
    case ModelId::TSO: {
      auto& buf = s.tso.buffers[t.tid - 1];
      switch (l.typ) {
        case AccessType::W:
          buf.emplace_back(x, l.val_w);
          break;
        case AccessType::R: {
          if (t.locked && opt.tso_locked_failed_cas) {
            if (!buf.empty()) not_enabled("locked read requires an empty buffer");
            if (s.tso.mem[x] != l.val_r) not_enabled("memory value mismatch");
          } else {
            auto bv = buffer_lookup(s.tso, t.tid, x);
            Value v = bv ? *bv : s.tso.mem[x];
            if (v != l.val_r) not_enabled("buffer/memory value mismatch");
          }
          break;
        }
        case AccessType::Rmw:
          if (!buf.empty()) not_enabled("RMW requires an empty buffer");
          if (s.tso.mem[x] != l.val_r) not_enabled("memory value mismatch");
          s.tso.mem[x] = l.val_w;
          break;
      }
      break;
    }
    case ModelId::RA:
    case ModelId::StrongCOH:
      switch (l.typ) {
        case AccessType::R:
          ra_read(s, t.tid, x, l.val_r, t.read_msg);
          break;
        case AccessType::W:
          t.write_msg = ra_write(s, t.tid, x, l.val_w, t.ra_write_pos, false);
          break;
        case AccessType::Rmw: {
          ra_read(s, t.tid, x, l.val_r, t.read_msg);
          int p = s.ra.pos(x, t.read_msg) + 1;
          t.write_msg = ra_write(s, t.tid, x, l.val_w, p, true);
          break;
        }
      }
      break;
  }
  return s;
}

LinkedState linked_init(const Program& p, ModelId m) {
  return LinkedState{p.init_state(),
                     machine_init(m, p.loc_count(), p.thread_count())};
}

namespace {

// Messages the thread may read at x; for RMWs additionally require a free
// slot right after the message for the written part.
std::vector<int> ra_readable(const RAState& ra, Tid t, LocId x, bool for_rmw) {
  std::vector<int> out;
  const auto& ord = ra.order[x];
  for (int i = ra.view_pos(t, x); i < static_cast<int>(ord.size()); ++i) {
    if (for_rmw && i + 1 < static_cast<int>(ord.size()) &&
        ra.msgs[ord[i + 1]].locked_to_pred)
      continue;
    out.push_back(ord[i]);
  }
  return out;
}

void push_obs(std::vector<TransitionLabel>& out, Tid tid, EventLabel lab,
              bool locked, int read_msg = -1, int write_pos = -1) {
  TransitionLabel t;
  t.kind = TransitionLabel::Kind::Obs;
  t.tid = tid;
  t.lab = lab;
  t.locked = locked;
  t.read_msg = read_msg;
  t.ra_write_pos = write_pos;
  out.push_back(t);
}

}  // namespace

std::vector<TransitionLabel> enabled_transitions(const Program& p,
                                                 const LinkedState& s,
                                                 const OperationalOptions& opt) {
  std::vector<TransitionLabel> out;
  const MachineState& ms = s.mach;
  for (Tid tid = 1; tid <= p.thread_count(); ++tid) {
    auto pa = p.pending(s.prog, tid);
    if (!pa) continue;
    const auto& regs = s.prog.threads[tid - 1].regs;
    const LocId x = pa->loc;
    using IOp = Instruction::Op;
    switch (ms.model) {
      case ModelId::SC: {
        Value v = ms.sc.mem[x];
        push_obs(out, tid, p.label_for(*pa, regs, v), pa->locked);
        break;
      }
      case ModelId::TSO: {
        const bool empty = ms.tso.buffers[tid - 1].empty();
        if (pa->op == IOp::Store) {
          push_obs(out, tid, p.label_for(*pa, regs, 0), false);
          break;
        }
        if (pa->op == IOp::Load) {
          auto bv = buffer_lookup(ms.tso, tid, x);
          Value v = bv ? *bv : ms.tso.mem[x];
          push_obs(out, tid, p.label_for(*pa, regs, v), false);
          break;
        }
        if (pa->op == IOp::Cas) {
          Value v;
          if (opt.tso_locked_failed_cas) {
            if (!empty) break;
            v = ms.tso.mem[x];
          } else {
            auto bv = buffer_lookup(ms.tso, tid, x);
            v = bv ? *bv : ms.tso.mem[x];
            if (v == pa->expect && !empty) break;  // success still drains
          }
          push_obs(out, tid, p.label_for(*pa, regs, v), true);
          break;
        }
        if (!empty) break;  // FADD/SWAP
        push_obs(out, tid, p.label_for(*pa, regs, ms.tso.mem[x]), true);
        break;
      }
      case ModelId::RA:
      case ModelId::StrongCOH: {
        const RAState& ra = ms.ra;
        if (pa->op == IOp::Store) {
          const int lo = ra.view_pos(tid, x) + 1;
          const int hi = static_cast<int>(ra.order[x].size());
          if (!opt.all_ra_placements) {
            push_obs(out, tid, p.label_for(*pa, regs, 0), false, -1, hi);
          } else {
            for (int pos = lo; pos <= hi; ++pos) {
              if (pos < hi && ra.msgs[ra.order[x][pos]].locked_to_pred) continue;
              push_obs(out, tid, p.label_for(*pa, regs, 0), false, -1, pos);
            }
          }
          break;
        }
        if (pa->op == IOp::Load) {
          for (int id : ra_readable(ra, tid, x, false))
            push_obs(out, tid, p.label_for(*pa, regs, ra.msgs[id].val), false, id);
          break;
        }
        if (pa->op == IOp::Cas) {
          for (int id : ra_readable(ra, tid, x, false)) {
            Value v = ra.msgs[id].val;
            if (v == pa->expect) continue;  // failure branch: plain read
            push_obs(out, tid, p.label_for(*pa, regs, v), true, id);
          }
          for (int id : ra_readable(ra, tid, x, true)) {
            Value v = ra.msgs[id].val;
            if (v != pa->expect) continue;
            push_obs(out, tid, p.label_for(*pa, regs, v), true, id);
          }
          break;
        }
        for (int id : ra_readable(ra, tid, x, true))  // FADD/SWAP
          push_obs(out, tid, p.label_for(*pa, regs, ra.msgs[id].val), true, id);
        break;
      }
    }
  }
  // Silent memory transitions.
  if (ms.model == ModelId::TSO) {
    for (Tid tid = 1; tid <= p.thread_count(); ++tid)
      if (!ms.tso.buffers[tid - 1].empty()) {
        TransitionLabel t;
        t.kind = TransitionLabel::Kind::PropTSO;
        t.tid = tid;
        out.push_back(t);
      }
  } else if (ms.model == ModelId::RA || ms.model == ModelId::StrongCOH) {
    for (Tid tid = 1; tid <= p.thread_count(); ++tid)
      for (LocId x = 0; x < p.loc_count(); ++x) {
        const auto& ord = ms.ra.order[x];
        for (int i = ms.ra.view_pos(tid, x) + 1; i < static_cast<int>(ord.size());
             ++i) {
          TransitionLabel t;
          t.kind = TransitionLabel::Kind::PropRA;
          t.tid = tid;
          t.msg_id = ord[i];
          out.push_back(t);
        }
      }
  }
  return out;
}

LinkedState linked_step(const Program& p, const LinkedState& s,
                        TransitionLabel& t, const OperationalOptions& opt) {
  LinkedState out;
  out.mach = machine_step(s.mach, t, opt);
  out.prog = t.kind == TransitionLabel::Kind::Obs
                 ? p.step(s.prog, t.tid, t.lab)
                 : s.prog;
  return out;
}

Behavior AnnotatedTrace::behavior() const {
  Behavior b;
  b.threads.resize(thread_count);
  for (const auto& st : steps)
    if (st.t.kind == TransitionLabel::Kind::Obs)
      b.threads[st.t.tid - 1].push_back(st.t.lab);
  return b;
}

Behavior behavior_of_trace(const AnnotatedTrace& t) { return t.behavior(); }

namespace {

std::string class_key(const TransitionLabel& t) {
  switch (t.kind) {
    case TransitionLabel::Kind::Obs:
      return "t:" + std::to_string(t.tid);
    case TransitionLabel::Kind::PropTSO:
      return "pT:" + std::to_string(t.tid);
    case TransitionLabel::Kind::PropRA:
      return "pR:" + std::to_string(t.tid) + ":" + std::to_string(t.msg_id);
  }
  return "?";
}

}  // namespace

AnnotatedTrace fair_run(const Program& p, ModelId m,
                        const FairSchedulerConfig& cfg) {
  const int delay = cfg.delay_bound > 0 ? cfg.delay_bound : 4 * p.thread_count();
  OperationalOptions opt;
  opt.all_ra_placements = false;  // the sampler appends; exploration branches

  std::mt19937_64 rng(cfg.seed);
  AnnotatedTrace tr;
  tr.model = m;
  tr.thread_count = p.thread_count();
  tr.locs = p.locs();
  LinkedState s = linked_init(p, m);
  tr.initial = s.mach;

  std::map<std::string, long> age;  // continuously-enabled-and-untaken spans
  for (long step = 0; step < cfg.max_steps; ++step) {
    if (p.all_terminated(s.prog)) break;
    auto enabled = enabled_transitions(p, s, opt);
    if (cfg.unfair_no_silent) {
      std::erase_if(enabled, [](const TransitionLabel& t) {
        return t.kind != TransitionLabel::Kind::Obs;
      });
    }
    if (enabled.empty()) break;

    std::set<std::string> now;
    for (const auto& t : enabled) now.insert(class_key(t));
    std::erase_if(age, [&](const auto& kv) { return !now.count(kv.first); });
    for (const auto& k : now) age[k] += 1;

    // Saturated classes drain oldest-first, so a class waits at most the
    // delay bound plus the number of simultaneously saturated classes.
    std::string forced;
    long best = 0;
    for (const auto& [k, a] : age)
      if (a >= delay && (a > best || (a == best && (forced.empty() || k < forced)))) {
        forced = k;
        best = a;
      }
    std::vector<const TransitionLabel*> pool;
    for (const auto& t : enabled)
      if (forced.empty() || class_key(t) == forced) pool.push_back(&t);
    TransitionLabel chosen = *pool[rng() % pool.size()];
    s = linked_step(p, s, chosen, opt);
    age[class_key(chosen)] = 0;
    tr.steps.push_back(AnnotatedStep{chosen, s.mach});
  }
  // Finite runs stay memory-fair witnesses: drain the store buffers so
  // every write has a matching propagation.
  if (m == ModelId::TSO && p.all_terminated(s.prog)) {
    for (Tid tid = 1; tid <= p.thread_count(); ++tid)
      while (!s.mach.tso.buffers[tid - 1].empty()) {
        TransitionLabel t;
        t.kind = TransitionLabel::Kind::PropTSO;
        t.tid = tid;
        s = linked_step(p, s, t, opt);
        tr.steps.push_back(AnnotatedStep{t, s.mach});
      }
  }
  return tr;
}

namespace {

class OperationalExplorer {
 public:
  OperationalExplorer(const Program& p, ModelId m, int max_events,
                      const OperationalOptions& opt)
      : p_(p), m_(m), max_events_(max_events), opt_(opt) {}

  std::vector<Behavior> run() {
    LinkedState init = linked_init(p_, m_);
    const BehaviorSet& res = suffixes(init);
    return {res.begin(), res.end()};
  }

 private:
  struct BehaviorLess {
    bool operator()(const Behavior& a, const Behavior& b) const {
      return a.key() < b.key();
    }
  };
  using BehaviorSet = std::set<Behavior, BehaviorLess>;

  std::string state_key(const LinkedState& s) const {
    std::ostringstream os;
    for (const auto& ts : s.prog.threads) {
      os << ts.pc << "@" << ts.events << "@";
      for (Value v : ts.regs) os << v << ",";
      os << ";";
    }
    os << s.mach.key();
    return os.str();
  }

  // Terminated-run suffix behaviors are a function of the joint state, so
  // they memoize cleanly. The joint state graph is acyclic: observable
  // steps are bounded and silent steps strictly shrink buffers or advance
  // views.
  const BehaviorSet& suffixes(const LinkedState& s) {
    std::string key = state_key(s);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    BehaviorSet acc;
    if (p_.all_terminated(s.prog)) {
      Behavior empty;
      empty.threads.resize(p_.thread_count());
      acc.insert(empty);
    }
    for (auto& t : enabled_transitions(p_, s, opt_)) {
      if (t.kind == TransitionLabel::Kind::Obs &&
          s.prog.threads[t.tid - 1].events >= max_events_)
        continue;
      TransitionLabel tt = t;
      LinkedState child = linked_step(p_, s, tt, opt_);
      const BehaviorSet& sub = suffixes(child);
      if (tt.kind == TransitionLabel::Kind::Obs) {
        for (const Behavior& b : sub) {
          Behavior ext = b;
          auto& seq = ext.threads[tt.tid - 1];
          seq.insert(seq.begin(), tt.lab);
          acc.insert(std::move(ext));
        }
      } else {
        for (const Behavior& b : sub) acc.insert(b);
      }
    }
    return memo_.emplace(std::move(key), std::move(acc)).first->second;
  }

  const Program& p_;
  ModelId m_;
  int max_events_;
  OperationalOptions opt_;
  std::unordered_map<std::string, BehaviorSet> memo_;
};

}  // namespace

std::vector<Behavior> explore_operational(const Program& p, ModelId m,
                                          int max_events_per_thread,
                                          const OperationalOptions& opt) {
  return OperationalExplorer(p, m, max_events_per_thread, opt).run();
}

}  // namespace memfair
