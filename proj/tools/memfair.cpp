// memfair: litmus-test checking, termination analysis, simulation and
// robustness checking for SC, TSO, RA and StrongCOH.
//
// Exit codes: 0 command ran without a verdict query, 2 usage/parse/bound
// error, 10/11/12 semantic verdicts (see each subcommand).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "memfair/correspond.hpp"
#include "memfair/errors.hpp"
#include "memfair/json_io.hpp"
#include "memfair/parser.hpp"
#include "memfair/robustness.hpp"
#include "memfair/termination.hpp"

namespace {

using namespace memfair;

constexpr int kExitError = 2;
constexpr int kExitAllowed = 10;    // check: allowed / terminate: terminates
constexpr int kExitForbidden = 11;  // check: forbidden / terminate: may diverge
constexpr int kExitUnsupported = 12;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Syntax, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int worker_count() {
  if (const char* env = std::getenv("MEMFAIR_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

struct CommonArgs {
  std::string file;
  std::string model = "sc";
  int max_events = 16;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("file", a.file, "litmus program")->required();
  cmd->add_option("--model", a.model, "sc | tso | ra | strongcoh")
      ->default_val(a.model);
  cmd->add_option("--max-events", a.max_events, "per-thread event budget")
      ->default_val(a.max_events);
  cmd->add_flag("--json", a.json, "machine-readable output");
}

int run_check(const CommonArgs& a, const std::string& assert_text) {
  Program prog(parse_program(slurp(a.file)));
  ModelId m = model_from_name(a.model);
  ExplorationBounds b;
  b.max_events_per_thread = a.max_events;
  if (assert_text.empty()) {
    auto res = enumerate_consistent_graphs(prog, m, b, BoundMode::Strict,
                                           worker_count());
    auto complete = res.complete();
    if (a.json) {
      std::cout << "{\"graphs\":" << complete.size()
                << ",\"explored\":" << res.stats.explored << "}\n";
    } else {
      std::cout << "consistent complete graphs: " << complete.size()
                << " (explored " << res.stats.explored << ", pruned "
                << res.stats.pruned_inconsistent << ")\n";
    }
    return 0;
  }
  Assertion as = parse_assertion(assert_text, prog.source());
  Outcome out = check_outcome(prog, m, as, b, worker_count());
  const ExecutionGraph* w = out.witness ? &out.witness->graph : nullptr;
  if (a.json) {
    std::cout << outcome_to_json(out.allowed, w, true) << "\n";
  } else {
    std::cout << (out.allowed ? "allowed" : "forbidden") << " under "
              << model_name(m) << "\n";
    if (w) std::cout << graph_to_dot(*w);
  }
  return out.allowed ? kExitAllowed : kExitForbidden;
}

int run_terminate(const CommonArgs& a, int rounds) {
  ConcurrentProgram cp = parse_program(slurp(a.file));
  ModelId m = model_from_name(a.model);
  ExplorationBounds b;
  b.max_events_per_thread = a.max_events;
  TerminationVerdict v = check_lock_progress(cp, m, rounds, b, worker_count());
  if (a.json) {
    std::cout << termination_to_json(v, true) << "\n";
  } else {
    std::cout << outcome_name(v.outcome) << " under " << model_name(m)
              << " (explored " << v.stats.explored << ", pruned "
              << v.stats.pruned_inconsistent << ")\n";
    if (!v.reason.empty()) std::cout << "reason: " << v.reason << "\n";
    if (!v.model_note.empty()) std::cout << "note: " << v.model_note << "\n";
    if (v.witness) {
      std::cout << "stuck threads:";
      for (Tid t : v.stuck_threads) std::cout << " " << t;
      std::cout << "\n"
                << graph_to_dot(v.witness->graph)
                << graph_to_json(v.witness->graph, true) << "\n";
    }
  }
  switch (v.outcome) {
    case TerminationVerdict::Outcome::AllSpinloopsTerminate:
      return kExitAllowed;
    case TerminationVerdict::Outcome::MayDiverge:
      return kExitForbidden;
    case TerminationVerdict::Outcome::Unsupported:
      return kExitUnsupported;
  }
  return kExitError;
}

int run_simulate(const CommonArgs& a, long max_steps, int delay_bound,
                 std::uint64_t seed, bool emit_graph, bool unfair) {
  Program prog(parse_program(slurp(a.file)));
  ModelId m = model_from_name(a.model);
  FairSchedulerConfig cfg;
  cfg.max_steps = max_steps;
  cfg.delay_bound = delay_bound;
  cfg.seed = seed;
  cfg.unfair_no_silent = unfair;
  AnnotatedTrace tr = fair_run(prog, m, cfg);
  std::cout << trace_to_json(tr, !a.json) << "\n";
  if (emit_graph) {
    ExecutionGraph g = trace_to_graph(tr);
    if (!consistent(g, m))
      throw Error(ErrorCode::Internal,
                  "trace-induced graph is not consistent under the model");
    std::cout << graph_to_json(g, true) << "\n";
  }
  return 0;
}

int run_robust(const CommonArgs& a) {
  Program prog(parse_program(slurp(a.file)));
  ModelId m = model_from_name(a.model);
  ExplorationBounds b;
  b.max_events_per_thread = a.max_events;
  RobustnessVerdict v = check_finite_robustness(prog, m, b, worker_count());
  if (a.json) {
    std::cout << robustness_to_json(v, true) << "\n";
  } else {
    std::cout << (v.robust ? "robust" : "non-robust") << " against "
              << model_name(m) << "\n";
    if (v.witness) std::cout << graph_to_dot(*v.witness);
  }
  return v.robust ? kExitAllowed : kExitForbidden;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-memory litmus checking, termination and robustness"};
  app.require_subcommand(1);

  CommonArgs check_args, term_args, sim_args, robust_args;
  std::string assert_text;
  int rounds = 1;
  long max_steps = 10000;
  int delay_bound = 0;
  std::uint64_t seed = 0;
  bool emit_graph = false, unfair = false;

  CLI::App* check = app.add_subcommand("check", "decide a litmus outcome");
  add_common(check, check_args);
  check->add_option("--assert", assert_text,
                    "final-register predicate, e.g. \"a = 0 && b = 0\"");

  CLI::App* term = app.add_subcommand("terminate", "decide spinloop termination");
  term_args.max_events = 64;
  add_common(term, term_args);
  term->add_option("--rounds", rounds, "repeat each thread body this often")
      ->default_val(1);

  CLI::App* sim = app.add_subcommand("simulate", "one fair run");
  add_common(sim, sim_args);
  sim->add_option("--max-steps", max_steps)->default_val(max_steps);
  sim->add_option("--delay-bound", delay_bound,
                  "fairness window (0 = 4 x threads)");
  sim->add_option("--seed", seed)->default_val(seed);
  sim->add_flag("--emit-graph", emit_graph,
                "also print the trace-induced execution graph");
  sim->add_flag("--unfair", unfair,
                "never schedule silent memory transitions (demonstration)");

  CLI::App* rob = app.add_subcommand("robust", "check finite robustness");
  add_common(rob, robust_args);

  try {
    app.parse(argc, argv);
    if (check->parsed()) return run_check(check_args, assert_text);
    if (term->parsed()) return run_terminate(term_args, rounds);
    if (sim->parsed())
      return run_simulate(sim_args, max_steps, delay_bound, seed, emit_graph,
                          unfair);
    if (rob->parsed()) return run_robust(robust_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitError : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
