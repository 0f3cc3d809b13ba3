#include "memfair/program.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "memfair/errors.hpp"

namespace memfair {

std::shared_ptr<const Expr> Expr::constant(Value v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->k = v;
  return e;
}

std::shared_ptr<const Expr> Expr::regref(RegId r) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Reg;
  e->reg = r;
  return e;
}

std::shared_ptr<const Expr> Expr::binary(Op op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

Value eval(const Expr& e, const std::vector<Value>& regs) {
  switch (e.op) {
    case Expr::Op::Const:
      return e.k;
    case Expr::Op::Reg:
      return regs[e.reg];
    case Expr::Op::Add:
      return eval(*e.lhs, regs) + eval(*e.rhs, regs);
    case Expr::Op::Sub:
      return eval(*e.lhs, regs) - eval(*e.rhs, regs);
    case Expr::Op::Eq:
      return eval(*e.lhs, regs) == eval(*e.rhs, regs) ? 1 : 0;
    case Expr::Op::Ne:
      return eval(*e.lhs, regs) != eval(*e.rhs, regs) ? 1 : 0;
    case Expr::Op::Lt:
      return eval(*e.lhs, regs) < eval(*e.rhs, regs) ? 1 : 0;
    case Expr::Op::Le:
      return eval(*e.lhs, regs) <= eval(*e.rhs, regs) ? 1 : 0;
  }
  return 0;
}

void collect_regs(const Expr& e, std::vector<RegId>& out) {
  if (e.op == Expr::Op::Reg) {
    out.push_back(e.reg);
    return;
  }
  if (e.lhs) collect_regs(*e.lhs, out);
  if (e.rhs) collect_regs(*e.rhs, out);
}

LocId ConcurrentProgram::loc_id(const std::string& name) const {
  for (size_t i = 0; i < locs.size(); ++i)
    if (locs[i] == name) return static_cast<LocId>(i);
  return -1;
}

namespace {

void collect_consts(const Expr& e, std::set<Value>& out) {
  if (e.op == Expr::Op::Const) out.insert(e.k);
  if (e.lhs) collect_consts(*e.lhs, out);
  if (e.rhs) collect_consts(*e.rhs, out);
}

}  // namespace

std::vector<Value> ConcurrentProgram::default_value_domain() const {
  std::set<Value> vals{0};
  for (const auto& t : threads)
    for (const auto& ins : t.code) {
      if (ins.e0) collect_consts(*ins.e0, vals);
      if (ins.e1) collect_consts(*ins.e1, vals);
    }
  return {vals.begin(), vals.end()};
}

// ---------------------------------------------------------------------------
// Control-flow analysis and spinloop detection
// ---------------------------------------------------------------------------

namespace {

std::vector<int> successors(const ThreadProgram& t, int i) {
  const int n = static_cast<int>(t.code.size());
  const Instruction& ins = t.code[i];
  switch (ins.op) {
    case Instruction::Op::Halt:
      return {};
    case Instruction::Op::Goto:
      return {ins.target};
    case Instruction::Op::Branch: {
      std::vector<int> s;
      if (i + 1 <= n) s.push_back(i + 1);  // n acts as the exit node
      if (ins.target != i + 1) s.push_back(ins.target);
      return s;
    }
    default:
      return {i + 1};
  }
}

bool assigns_register(const Instruction& ins, RegId* r) {
  switch (ins.op) {
    case Instruction::Op::Load:
    case Instruction::Op::Fadd:
    case Instruction::Op::Cas:
    case Instruction::Op::Swap:
    case Instruction::Op::Assign:
      if (ins.dst >= 0) {
        *r = ins.dst;
        return true;
      }
      return false;
    default:
      return false;
  }
}

std::vector<RegId> used_registers(const Instruction& ins) {
  std::vector<RegId> out;
  if (ins.e0) collect_regs(*ins.e0, out);
  if (ins.e1) collect_regs(*ins.e1, out);
  return out;
}

// An iteration of a read-only loop must reproduce the loop-head program
// state once the read values repeat. This holds when every register the
// body consumes is either untouched by the body or definitely re-assigned
// earlier in the same iteration.
bool body_registers_stable(const ThreadProgram& t, const LoopInfo& loop) {
  std::set<int> body(loop.body.begin(), loop.body.end());
  std::set<RegId> assigned_in_body;
  for (int i : loop.body) {
    RegId r;
    if (assigns_register(t.code[i], &r)) assigned_in_body.insert(r);
  }
  if (assigned_in_body.empty()) return true;

  // Definite-assignment dataflow inside the body; edges into the head are
  // cut so "before use" means earlier in the current iteration.
  const int n = static_cast<int>(t.code.size());
  std::vector<std::set<RegId>> in(n), out(n);
  std::vector<bool> top(n, true);
  top[loop.head] = false;  // IN[head] = empty
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i : loop.body) {
      std::set<RegId> newin;
      bool first = true;
      if (i != loop.head) {
        for (int p : loop.body) {
          auto ss = successors(t, p);
          if (std::find(ss.begin(), ss.end(), i) == ss.end()) continue;
          if (top[p]) continue;  // unreached yet: identity for intersection
          if (first) {
            newin = out[p];
            first = false;
          } else {
            std::set<RegId> inter;
            std::set_intersection(newin.begin(), newin.end(), out[p].begin(),
                                  out[p].end(),
                                  std::inserter(inter, inter.begin()));
            newin = inter;
          }
        }
        if (first) continue;  // no body predecessor reached yet
      }
      std::set<RegId> newout = newin;
      RegId r;
      if (assigns_register(t.code[i], &r)) newout.insert(r);
      if (top[i] || newin != in[i] || newout != out[i]) {
        top[i] = false;
        in[i] = newin;
        out[i] = newout;
        changed = true;
      }
    }
  }
  for (int i : loop.body) {
    for (RegId r : used_registers(t.code[i])) {
      if (!assigned_in_body.count(r)) continue;
      if (top[i] || !in[i].count(r)) return false;
    }
  }
  return true;
}

}  // namespace

SpinloopInfo detect_spinloops(const ThreadProgram& t) {
  SpinloopInfo info;
  const int n = static_cast<int>(t.code.size());
  info.innermost_spinloop.assign(n, -1);
  if (n == 0) return info;

  // Reachability from entry.
  std::vector<bool> reach(n + 1, false);
  {
    std::vector<int> stack{0};
    reach[0] = true;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      if (i >= n) continue;
      for (int s : successors(t, i))
        if (!reach[s]) {
          reach[s] = true;
          stack.push_back(s);
        }
    }
  }

  // Iterative dominators over reachable instructions.
  std::vector<std::set<int>> dom(n);
  std::set<int> all;
  for (int i = 0; i < n; ++i)
    if (reach[i]) all.insert(i);
  for (int i : all) dom[i] = (i == 0) ? std::set<int>{0} : all;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i : all) {
      if (i == 0) continue;
      std::set<int> d = all;
      bool has_pred = false;
      for (int p : all) {
        auto ss = successors(t, p);
        if (std::find(ss.begin(), ss.end(), i) == ss.end()) continue;
        has_pred = true;
        std::set<int> inter;
        std::set_intersection(d.begin(), d.end(), dom[p].begin(), dom[p].end(),
                              std::inserter(inter, inter.begin()));
        d = inter;
      }
      if (!has_pred) d.clear();
      d.insert(i);
      if (d != dom[i]) {
        dom[i] = d;
        changed = true;
      }
    }
  }

  // Back edges and their natural loops. A loop is formed per back edge,
  // not per header: a read-only retry loop often shares its header with a
  // larger loop (e.g. a CAS retry path), and only the inner one spins.
  std::set<std::pair<int, int>> back_edges;
  for (int u : all)
    for (int v : successors(t, u))
      if (v < n && reach[v] && dom[u].count(v)) back_edges.insert({u, v});

  for (auto& [u, h] : back_edges) {
    LoopInfo loop;
    loop.head = h;
    loop.back_edges.push_back(u);
    // Backward reachability from u, not crossing h.
    std::set<int> body{h};
    std::vector<int> stack{u};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (body.count(x)) continue;
      body.insert(x);
      for (int p : all) {
        auto ss = successors(t, p);
        if (std::find(ss.begin(), ss.end(), x) != ss.end() && !body.count(p))
          stack.push_back(p);
      }
    }
    loop.body.assign(body.begin(), body.end());
    for (int i : loop.body) {
      if (t.code[i].op == Instruction::Op::Halt) loop.has_exit = true;
      for (int s : successors(t, i))
        if (s >= n || !body.count(s)) loop.has_exit = true;
    }
    bool read_only = true, has_load = false;
    for (int i : loop.body) {
      switch (t.code[i].op) {
        case Instruction::Op::Load:
          has_load = true;
          break;
        case Instruction::Op::Assign:
        case Instruction::Op::Branch:
        case Instruction::Op::Goto:
          break;
        default:
          read_only = false;
      }
    }
    loop.is_spinloop =
        read_only && has_load && body_registers_stable(t, loop);
    info.loops.push_back(loop);
  }
  std::sort(info.loops.begin(), info.loops.end(),
            [](const LoopInfo& a, const LoopInfo& b) {
              if (a.body.size() != b.body.size())
                return a.body.size() < b.body.size();
              return a.head < b.head;
            });

  for (size_t li = 0; li < info.loops.size(); ++li) {
    if (!info.loops[li].is_spinloop) continue;
    for (int i : info.loops[li].body)
      if (info.innermost_spinloop[i] < 0)
        info.innermost_spinloop[i] = static_cast<int>(li);
  }

  // Cycles that survive after removing loop back edges mean the CFG is
  // irreducible for our purposes.
  auto cyclic_without = [&](bool drop_all_back, bool drop_spin_only) {
    std::vector<int> color(n, 0);
    std::function<bool(int)> dfs = [&](int i) -> bool {
      color[i] = 1;
      for (int s : successors(t, i)) {
        if (s >= n) continue;
        bool dropped = false;
        if (back_edges.count({i, s})) {
          if (drop_all_back) dropped = true;
          if (drop_spin_only) {
            for (const auto& loop : info.loops)
              if (loop.head == s && loop.is_spinloop &&
                  std::find(loop.back_edges.begin(), loop.back_edges.end(),
                            i) != loop.back_edges.end())
                dropped = true;
          }
        }
        if (dropped) continue;
        if (color[s] == 1) return true;
        if (color[s] == 0 && dfs(s)) return true;
      }
      color[i] = 2;
      return false;
    };
    for (int i : all)
      if (color[i] == 0 && dfs(i)) return true;
    return false;
  };
  info.reducible = !cyclic_without(/*drop_all_back=*/true, false);
  info.acyclic_outside_spinloops =
      info.reducible && !cyclic_without(false, /*drop_spin_only=*/true);
  return info;
}

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

Program::Program(ConcurrentProgram p) : p_(std::move(p)) {
  for (const auto& t : p_.threads) spin_.push_back(detect_spinloops(t));
}

void Program::note_head_crossing(Tid t, ThreadState& ts, int instr) const {
  const SpinloopInfo& si = spin_[t - 1];
  if (ts.cur_loop >= 0) {
    const LoopInfo& cur = si.loops[ts.cur_loop];
    if (!std::binary_search(cur.body.begin(), cur.body.end(), instr)) {
      ts.cur_loop = -1;
      ts.full_iters = 0;
      ts.iter_start_sn = -1;
    }
  }
  for (size_t li = 0; li < si.loops.size(); ++li) {
    if (!si.loops[li].is_spinloop || si.loops[li].head != instr) continue;
    if (ts.cur_loop == static_cast<int>(li)) {
      if (ts.iter_start_sn < ts.events) {
        ts.full_iters += 1;
        ts.last_iter_begin = ts.iter_start_sn;
        ts.last_iter_end = ts.events - 1;
      }
      ts.iter_start_sn = ts.events;
    } else {
      ts.cur_loop = static_cast<int>(li);
      ts.full_iters = 0;
      ts.iter_start_sn = ts.events;
    }
    break;
  }
}

void Program::normalize_thread(Tid t, ThreadState& ts, bool) const {
  const ThreadProgram& tp = p_.thread(t);
  const int n = static_cast<int>(tp.code.size());
  long guard = 0;
  int pc = ts.pc;
  while (true) {
    if (++guard > 1000000)
      throw Error(ErrorCode::SilentLoop,
                  "thread " + std::to_string(t) +
                      " loops without performing a memory access");
    if (pc >= n) {
      ts.pc = n;
      return;
    }
    note_head_crossing(t, ts, pc);
    const Instruction& ins = tp.code[pc];
    switch (ins.op) {
      case Instruction::Op::Assign:
        ts.regs[ins.dst] = eval(*ins.e0, ts.regs);
        ++pc;
        break;
      case Instruction::Op::Goto:
        pc = ins.target;
        break;
      case Instruction::Op::Branch:
        pc = eval(*ins.e0, ts.regs) != 0 ? ins.target : pc + 1;
        break;
      case Instruction::Op::Halt:
        ts.pc = n;
        return;
      default:
        ts.pc = pc;
        return;
    }
  }
}

ProgState Program::init_state() const {
  ProgState s;
  for (Tid t = 1; t <= thread_count(); ++t) {
    ThreadState ts;
    ts.pc = 0;
    ts.regs.assign(p_.thread(t).reg_count(), 0);
    normalize_thread(t, ts, true);
    s.threads.push_back(std::move(ts));
  }
  return s;
}

bool Program::terminated(const ProgState& s, Tid t) const {
  return s.threads[t - 1].pc >= static_cast<int>(p_.thread(t).code.size());
}

bool Program::all_terminated(const ProgState& s) const {
  for (Tid t = 1; t <= thread_count(); ++t)
    if (!terminated(s, t)) return false;
  return true;
}

std::optional<PendingAccess> Program::pending(const ProgState& s, Tid t) const {
  if (terminated(s, t)) return std::nullopt;
  const ThreadState& ts = s.threads[t - 1];
  const Instruction& ins = p_.thread(t).code[ts.pc];
  assert(ins.is_memory_access());
  PendingAccess a;
  a.op = ins.op;
  a.loc = ins.loc;
  a.dst = ins.dst;
  switch (ins.op) {
    case Instruction::Op::Store:
      a.store_val = eval(*ins.e0, ts.regs);
      break;
    case Instruction::Op::Fadd:
      a.addend = eval(*ins.e0, ts.regs);
      a.locked = true;
      break;
    case Instruction::Op::Cas:
      a.expect = eval(*ins.e0, ts.regs);
      a.swap_val = eval(*ins.e1, ts.regs);
      a.locked = true;
      break;
    case Instruction::Op::Swap:
      a.swap_val = eval(*ins.e0, ts.regs);
      a.locked = true;
      break;
    default:
      break;
  }
  return a;
}

EventLabel Program::label_for(const PendingAccess& a, const std::vector<Value>&,
                              Value v) const {
  switch (a.op) {
    case Instruction::Op::Load:
      return EventLabel::make_read(a.loc, v);
    case Instruction::Op::Store:
      return EventLabel::make_write(a.loc, a.store_val);
    case Instruction::Op::Fadd:
      return EventLabel::make_rmw(a.loc, v, v + a.addend);
    case Instruction::Op::Swap:
      return EventLabel::make_rmw(a.loc, v, a.swap_val);
    case Instruction::Op::Cas:
      if (v == a.expect) return EventLabel::make_rmw(a.loc, v, a.swap_val);
      return EventLabel::make_read(a.loc, v);
    default:
      throw Error(ErrorCode::Internal, "label_for on non-memory instruction");
  }
}

std::vector<std::pair<Tid, EventLabel>> Program::enabled_labels(
    const ProgState& s, const std::vector<Value>& domain) const {
  std::vector<std::pair<Tid, EventLabel>> out;
  for (Tid t = 1; t <= thread_count(); ++t) {
    auto a = pending(s, t);
    if (!a) continue;
    const auto& regs = s.threads[t - 1].regs;
    if (a->op == Instruction::Op::Store) {
      out.emplace_back(t, label_for(*a, regs, 0));
      continue;
    }
    for (Value v : domain) out.emplace_back(t, label_for(*a, regs, v));
  }
  return out;
}

namespace {

bool label_matches_access(const PendingAccess& a, const EventLabel& l) {
  if (l.loc != a.loc) return false;
  switch (a.op) {
    case Instruction::Op::Load:
      return l.typ == AccessType::R;
    case Instruction::Op::Store:
      return l.typ == AccessType::W && l.val_w == a.store_val;
    case Instruction::Op::Fadd:
      return l.typ == AccessType::Rmw && l.val_w == l.val_r + a.addend;
    case Instruction::Op::Swap:
      return l.typ == AccessType::Rmw && l.val_w == a.swap_val;
    case Instruction::Op::Cas:
      if (l.typ == AccessType::Rmw)
        return l.val_r == a.expect && l.val_w == a.swap_val;
      return l.typ == AccessType::R && l.val_r != a.expect;
    default:
      return false;
  }
}

}  // namespace

void Program::step_inplace(ProgState& s, Tid t, const EventLabel& l) const {
  auto a = pending(s, t);
  if (!a || !label_matches_access(*a, l))
    throw Error(ErrorCode::NotEnabled,
                "label not enabled for thread " + std::to_string(t));
  ThreadState& ts = s.threads[t - 1];
  if (a->dst >= 0 && a->op != Instruction::Op::Store)
    ts.regs[a->dst] = l.val_r;
  ts.events += 1;
  ts.pc += 1;
  normalize_thread(t, ts, true);
}

ProgState Program::step(const ProgState& s, Tid t, const EventLabel& l) const {
  ProgState out = s;
  step_inplace(out, t, l);
  return out;
}

ThreadState Program::replay_thread(Tid t,
                                   const std::vector<EventLabel>& labels) const {
  ProgState s;
  s.threads.resize(thread_count());
  for (Tid u = 1; u <= thread_count(); ++u) {
    s.threads[u - 1].pc = 0;
    s.threads[u - 1].regs.assign(p_.thread(u).reg_count(), 0);
    normalize_thread(u, s.threads[u - 1], true);
  }
  for (const auto& l : labels) s = step(s, t, l);
  return s.threads[t - 1];
}

bool Program::at_spinloop_head(const ProgState& s, Tid t, int* loop_out) const {
  const ThreadState& ts = s.threads[t - 1];
  if (terminated(s, t)) return false;
  if (ts.cur_loop < 0 || ts.iter_start_sn != ts.events) return false;
  if (loop_out) *loop_out = ts.cur_loop;
  return true;
}

// ---------------------------------------------------------------------------
// Unrolling
// ---------------------------------------------------------------------------

ConcurrentProgram unroll_program(const ConcurrentProgram& p, int rounds) {
  if (rounds < 1) throw Error(ErrorCode::Internal, "rounds must be >= 1");
  if (rounds == 1) return p;
  ConcurrentProgram out = p;
  for (auto& t : out.threads) {
    const auto body = t.code;
    const int len = static_cast<int>(body.size());
    std::vector<Instruction> code;
    for (int c = 0; c < rounds; ++c) {
      for (const auto& ins : body) {
        Instruction ni = ins;
        if (ni.target >= 0) ni.target += c * len;
        if (ni.op == Instruction::Op::Halt && c + 1 < rounds) {
          ni.op = Instruction::Op::Goto;
          ni.target = (c + 1) * len;
        }
        code.push_back(ni);
      }
    }
    t.code = std::move(code);
  }
  return out;
}

std::string to_string(const EventLabel& l, const std::string& loc_name) {
  switch (l.typ) {
    case AccessType::R:
      return "R(" + loc_name + "," + std::to_string(l.val_r) + ")";
    case AccessType::W:
      return "W(" + loc_name + "," + std::to_string(l.val_w) + ")";
    case AccessType::Rmw:
      return "RMW(" + loc_name + "," + std::to_string(l.val_r) + "," +
             std::to_string(l.val_w) + ")";
  }
  return "?";
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Syntax:
      return "E_SYNTAX";
    case ErrorCode::UndeclaredLocation:
      return "E_UNDECLARED_LOCATION";
    case ErrorCode::DanglingLabel:
      return "E_DANGLING_LABEL";
    case ErrorCode::UnsupportedLoop:
      return "E_UNSUPPORTED_LOOP";
    case ErrorCode::SilentLoop:
      return "E_SILENT_LOOP";
    case ErrorCode::NotEnabled:
      return "E_NOT_ENABLED";
    case ErrorCode::BoundExceeded:
      return "E_BOUND_EXCEEDED";
    case ErrorCode::Cyclic:
      return "E_CYCLIC";
    case ErrorCode::NotPrefixClosed:
      return "E_NOT_PREFIX_CLOSED";
    case ErrorCode::UnpropagatedWrite:
      return "E_UNPROPAGATED_WRITE";
    case ErrorCode::InconsistentInput:
      return "E_INCONSISTENT_INPUT";
    case ErrorCode::Internal:
      return "E_INTERNAL";
  }
  return "E_UNKNOWN";
}

}  // namespace memfair
