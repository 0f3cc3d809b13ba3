#include "memfair/termination.hpp"

#include <algorithm>

#include "memfair/errors.hpp"

namespace memfair {

const char* outcome_name(TerminationVerdict::Outcome o) {
  switch (o) {
    case TerminationVerdict::Outcome::AllSpinloopsTerminate:
      return "AllSpinloopsTerminate";
    case TerminationVerdict::Outcome::MayDiverge:
      return "MayDiverge";
    case TerminationVerdict::Outcome::Unsupported:
      return "Unsupported";
  }
  return "?";
}

WitnessCheck is_nontermination_witness(const ExecutionGraph& g,
                                       const Program& p) {
  WitnessCheck wc;
  Behavior beta = g.behavior(p.thread_count());
  const Relation fr = g.fr();
  bool any_nonterminated = false;
  for (Tid tid = 1; tid <= p.thread_count(); ++tid) {
    ThreadState ts = p.replay_thread(tid, beta.threads[tid - 1]);
    const bool term = ts.pc >= static_cast<int>(p.source().thread(tid).code.size());
    if (term) continue;
    any_nonterminated = true;

    WitnessThreadCheck tc;
    tc.tid = tid;
    const bool at_head =
        ts.cur_loop >= 0 && ts.iter_start_sn == ts.events && ts.full_iters >= 1;
    if (!at_head)
      throw Error(ErrorCode::UnsupportedLoop,
                  "non-terminated thread " + std::to_string(tid) +
                      " is not parked at a spinloop head");
    tc.iter_begin = ts.last_iter_begin;
    tc.iter_end = ts.last_iter_end;
    if (tc.iter_end != ts.events - 1)
      throw Error(ErrorCode::Internal, "final iteration does not end the run");

    const auto& labels = beta.threads[tid - 1];
    tc.reads_only = true;
    for (int sn = tc.iter_begin; sn <= tc.iter_end; ++sn)
      if (!labels[sn].is_read() || labels[sn].is_write()) tc.reads_only = false;

    // Re-running the final iteration with the same read values must
    // reproduce the state at the loop head exactly.
    {
      std::vector<EventLabel> again = labels;
      for (int sn = tc.iter_begin; sn <= tc.iter_end; ++sn)
        again.push_back(labels[sn]);
      try {
        ThreadState ts2 = p.replay_thread(tid, again);
        tc.repeatable = ts2.pc == ts.pc && ts2.regs == ts.regs;
      } catch (const Error&) {
        tc.repeatable = false;
      }
    }

    // No fr-successors: every read of the iteration reads an mo-maximal
    // write.
    tc.fr_empty = true;
    for (int i = 0; i < g.size(); ++i) {
      const Event& e = g.events[i];
      if (e.is_init() || e.tid != tid) continue;
      if (e.sn < tc.iter_begin || e.sn > tc.iter_end) continue;
      for (int j = 0; j < g.size(); ++j)
        if (fr.at(i, j)) tc.fr_empty = false;
    }
    wc.threads.push_back(tc);
  }
  if (!any_nonterminated) {
    wc.is_witness = false;
    wc.reason = "all threads terminated";
    return wc;
  }
  wc.is_witness = true;
  for (const auto& tc : wc.threads) {
    if (!tc.reads_only || !tc.fr_empty) wc.is_witness = false;
    if (!tc.repeatable) {
      wc.is_witness = false;
      wc.decidable = false;
      wc.reason = "final iteration of thread " + std::to_string(tc.tid) +
                  " is not repeatable";
    }
  }
  return wc;
}

TerminationVerdict analyze_termination(const Program& p, ModelId m,
                                       const ExplorationBounds& b,
                                       int workers) {
  TerminationVerdict v;
  if (m == ModelId::StrongCOH)
    v.model_note =
        "extended model: witness extension argument checked as a finite "
        "property, not covered by the SC/TSO/RA lemma";

  auto unsupported = [&](const std::string& why) {
    v.outcome = TerminationVerdict::Outcome::Unsupported;
    v.reason = why;
    return v;
  };

  for (Tid tid = 1; tid <= p.thread_count(); ++tid) {
    const SpinloopInfo& si = p.spinloops(tid);
    if (!si.reducible)
      return unsupported("thread " + std::to_string(tid) +
                         " has an irreducible control-flow graph");
    for (const auto& loop : si.loops)
      if (!loop.is_spinloop && !loop.has_exit)
        return unsupported("thread " + std::to_string(tid) +
                           " has a non-spinloop loop with no exit");
  }

  ExplorationBounds bb = b;
  bb.spin_cap = 1;
  EnumerationResult res;
  try {
    res = enumerate_consistent_graphs(p, m, bb, BoundMode::Strict, workers);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BoundExceeded)
      return unsupported(std::string(e.what()) +
                         " (unbounded behavior outside spinloops?)");
    throw;
  }
  v.stats = res.stats;
  if (res.stats.clipped > 0)
    return unsupported("event bound clipped the capped exploration");

  bool undecidable = false;
  std::string undecidable_why;
  for (const auto& eg : res.graphs) {
    if (eg.status != GraphStatus::Stuck) continue;
    WitnessCheck wc;
    try {
      wc = is_nontermination_witness(eg.graph, p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnsupportedLoop) return unsupported(e.what());
      throw;
    }
    if (wc.is_witness) {
      v.outcome = TerminationVerdict::Outcome::MayDiverge;
      v.witness = eg;
      v.stuck_threads = eg.stuck_threads;
      return v;
    }
    if (!wc.decidable) {
      undecidable = true;
      undecidable_why = wc.reason;
    }
  }
  if (undecidable) return unsupported(undecidable_why);
  v.outcome = TerminationVerdict::Outcome::AllSpinloopsTerminate;
  return v;
}

TerminationVerdict check_lock_progress(const ConcurrentProgram& p, ModelId m,
                                       int rounds, const ExplorationBounds& b,
                                       int workers) {
  Program unrolled(unroll_program(p, rounds));
  return analyze_termination(unrolled, m, b, workers);
}

}  // namespace memfair
