#ifndef MEMFAIR_PROGRAM_HPP_
#define MEMFAIR_PROGRAM_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memfair/label.hpp"

namespace memfair {

/// Expression over a thread's registers. Comparisons yield 0/1.
struct Expr {
  enum class Op { Const, Reg, Add, Sub, Eq, Ne, Lt, Le };
  Op op = Op::Const;
  Value k = 0;
  RegId reg = 0;
  std::shared_ptr<const Expr> lhs, rhs;

  static std::shared_ptr<const Expr> constant(Value v);
  static std::shared_ptr<const Expr> regref(RegId r);
  static std::shared_ptr<const Expr> binary(Op op, std::shared_ptr<const Expr> l,
                                            std::shared_ptr<const Expr> r);
};
using ExprPtr = std::shared_ptr<const Expr>;

Value eval(const Expr& e, const std::vector<Value>& regs);
/// Registers read anywhere in the expression.
void collect_regs(const Expr& e, std::vector<RegId>& out);

struct Instruction {
  enum class Op { Load, Store, Fadd, Cas, Swap, Assign, Branch, Goto, Halt };
  Op op = Op::Halt;
  RegId dst = -1;       // Load/Fadd/Cas/Swap/Assign (-1: discarded, e.g. fence)
  LocId loc = -1;       // memory ops
  ExprPtr e0, e1;       // Store/Fadd: e0; Cas: e0 = expected, e1 = new;
                        // Swap/Assign/Branch: e0
  int target = -1;      // Branch/Goto: instruction index
  int line = 0;         // source line, for diagnostics

  bool is_memory_access() const {
    return op == Op::Load || op == Op::Store || op == Op::Fadd ||
           op == Op::Cas || op == Op::Swap;
  }
};

/// One loop of a thread's control-flow graph (one natural loop per header;
/// back edges into the same header are merged).
struct LoopInfo {
  int head = -1;                 // back-edge target instruction
  std::vector<int> body;         // instruction indices, sorted
  std::vector<int> back_edges;   // sources of back edges
  bool is_spinloop = false;      // read-only body, stable register state
  bool has_exit = false;         // some body instruction can leave the loop
};

struct SpinloopInfo {
  std::vector<LoopInfo> loops;
  std::vector<int> innermost_spinloop;  // per instruction: loop index or -1
  bool acyclic_outside_spinloops = true;
  bool reducible = true;
};

struct ThreadProgram {
  Tid tid = 0;
  std::vector<Instruction> code;
  std::vector<std::string> reg_names;

  int reg_count() const { return static_cast<int>(reg_names.size()); }
};

/// Top-level parallel composition; threads are numbered 1..N and all
/// locations start at 0.
struct ConcurrentProgram {
  std::vector<ThreadProgram> threads;  // threads[i] has tid i+1
  std::vector<std::string> locs;
  LocId fence_loc = -1;  // reserved RMW location backing `fence`, if used

  int thread_count() const { return static_cast<int>(threads.size()); }
  const ThreadProgram& thread(Tid t) const { return threads[t - 1]; }
  LocId loc_id(const std::string& name) const;

  /// Integer constants appearing in the program plus 0; the default value
  /// domain for program-level label enumeration.
  std::vector<Value> default_value_domain() const;
};

/// Local state of one thread. `pc` always points at a memory access or at
/// code.size() (terminated); register-only instructions are folded into
/// the preceding step.
struct ThreadState {
  int pc = 0;
  std::vector<Value> regs;

  // Spinloop bookkeeping (used by capped exploration and witness checks).
  int events = 0;            // labels emitted so far
  int cur_loop = -1;         // innermost spinloop whose head was last crossed
  int full_iters = 0;        // consecutive completed iterations of cur_loop
  int iter_start_sn = -1;    // first sn of the iteration in progress
  int last_iter_begin = -1;  // sn range of the last completed iteration
  int last_iter_end = -1;

  bool operator==(const ThreadState&) const = default;
};

struct ProgState {
  std::vector<ThreadState> threads;  // index i = tid i+1

  bool operator==(const ProgState&) const = default;
};

/// The pending memory access of a thread: the decoded instruction at its
/// (normalized) pc with operand expressions already evaluated.
struct PendingAccess {
  Instruction::Op op = Instruction::Op::Load;
  LocId loc = -1;
  RegId dst = -1;
  Value store_val = 0;   // Store
  Value addend = 0;      // Fadd
  Value expect = 0;      // Cas
  Value swap_val = 0;    // Cas (new value) / Swap
  /// RMW-family instruction: under TSO every label it emits (including a
  /// failed CAS's plain read) requires an empty store buffer.
  bool locked = false;
};

class Program;  // fwd

/// Immutable analyzed program: instruction streams plus loop metadata.
/// Shareable across exploration workers.
class Program {
 public:
  explicit Program(ConcurrentProgram p);

  const ConcurrentProgram& source() const { return p_; }
  int thread_count() const { return p_.thread_count(); }
  int loc_count() const { return static_cast<int>(p_.locs.size()); }
  const std::vector<std::string>& locs() const { return p_.locs; }
  const SpinloopInfo& spinloops(Tid t) const { return spin_[t - 1]; }

  ProgState init_state() const;
  bool terminated(const ProgState& s, Tid t) const;
  bool all_terminated(const ProgState& s) const;

  /// Decoded access at the thread's pc; nullopt when terminated.
  std::optional<PendingAccess> pending(const ProgState& s, Tid t) const;

  /// Labels the access can emit given a read value v (Store ignores v).
  EventLabel label_for(const PendingAccess& a, const std::vector<Value>& regs,
                       Value v) const;

  /// All (tid, label) pairs enabled at s for reads drawn from `domain`.
  std::vector<std::pair<Tid, EventLabel>> enabled_labels(
      const ProgState& s, const std::vector<Value>& domain) const;

  /// Applies one observable step of thread t. The label must be enabled
  /// (Error(NotEnabled) otherwise). Advances past register-only
  /// instructions and updates the spinloop bookkeeping.
  ProgState step(const ProgState& s, Tid t, const EventLabel& l) const;
  /// In-place variant; only thread t's state changes.
  void step_inplace(ProgState& s, Tid t, const EventLabel& l) const;

  /// Sequence of states a thread goes through replaying a label list;
  /// used by witness validation. Throws Error(NotEnabled) on mismatch.
  ThreadState replay_thread(Tid t, const std::vector<EventLabel>& labels) const;

  /// True when the thread sits at the head of spinloop `loop` in s.
  bool at_spinloop_head(const ProgState& s, Tid t, int* loop_out = nullptr) const;

 private:
  void normalize_thread(Tid t, ThreadState& ts, bool count_crossings) const;
  void note_head_crossing(Tid t, ThreadState& ts, int instr) const;

  ConcurrentProgram p_;
  std::vector<SpinloopInfo> spin_;
};

SpinloopInfo detect_spinloops(const ThreadProgram& t);

/// Concatenates `rounds` copies of every thread body (each copy's Halt
/// falls through to the next copy). Used for bounded lock-progress checks.
ConcurrentProgram unroll_program(const ConcurrentProgram& p, int rounds);

}  // namespace memfair

#endif  // MEMFAIR_PROGRAM_HPP_
