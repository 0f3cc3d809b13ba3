#ifndef MEMFAIR_PARSER_HPP_
#define MEMFAIR_PARSER_HPP_

#include <string>

#include "memfair/program.hpp"

namespace memfair {

/// Parses the litmus text format:
///
///   program := "locations" ident+ ";" thread+
///   thread  := "thread" int "{" stmt* "}"
///   stmt    := [label ":"] instr ";"
///   instr   := reg "=" "load" "(" loc ")" | "store" "(" loc "," expr ")"
///            | reg "=" "FADD" "(" loc "," expr ")"
///            | reg "=" "CAS" "(" loc "," expr "," expr ")"
///            | reg "=" "SWAP" "(" loc "," expr ")"
///            | reg "=" expr | "if" "(" expr ")" "goto" label
///            | "goto" label | "fence" | "halt"
///
/// `fence` compiles to a SWAP writing 0 to the reserved location `f`.
/// Line comments start with `#` or `//`.
ConcurrentProgram parse_program(const std::string& text);

/// Final-state assertion over register values, e.g. "a = 1 && b = 0".
/// Bare register names must be unique across threads; `2:r` qualifies by
/// thread id. Operators: comparisons from the expression language plus
/// &&, || and !.
struct Assertion {
  struct Node;
  std::shared_ptr<const Node> root;

  bool eval(const std::vector<std::vector<Value>>& regs_per_thread) const;
};

Assertion parse_assertion(const std::string& text, const ConcurrentProgram& p);

}  // namespace memfair

#endif  // MEMFAIR_PARSER_HPP_
