#include "memfair/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "memfair/errors.hpp"

namespace memfair {

namespace {

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  Value value = 0;
  int line = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' || (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/')) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    tok_ = Token{};
    tok_.line = line_;
    if (pos_ >= s_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
              s_[pos_] == '.'))
        ++pos_;
      tok_.kind = Token::Kind::Ident;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() &&
         std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      size_t start = pos_;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      tok_.kind = Token::Kind::Int;
      tok_.text = s_.substr(start, pos_ - start);
      tok_.value = std::stoll(tok_.text);
      return;
    }
    // Multi-char operators.
    for (const char* op : {"!=", "<=", "&&", "||"}) {
      if (s_.compare(pos_, 2, op) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = op;
        pos_ += 2;
        return;
      }
    }
    tok_.kind = Token::Kind::Punct;
    tok_.text = std::string(1, c);
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1;
  Token tok_;
};

[[noreturn]] void fail(ErrorCode code, int line, const std::string& msg) {
  throw Error(code, "line " + std::to_string(line) + ": " + msg);
}

const std::set<std::string> kKeywords = {"locations", "thread", "load", "store",
                                         "FADD",      "CAS",    "SWAP", "if",
                                         "goto",      "fence",  "halt"};

class ProgramParser {
 public:
  explicit ProgramParser(const std::string& text) : lex_(text) {}

  ConcurrentProgram parse() {
    expect_ident("locations");
    while (lex_.peek().kind == Token::Kind::Ident) declare_loc(lex_.next());
    if (prog_.locs.empty())
      fail(ErrorCode::Syntax, lex_.peek().line, "expected at least one location");
    expect_punct(";");
    while (lex_.peek().kind != Token::Kind::End) parse_thread();
    if (prog_.threads.empty())
      fail(ErrorCode::Syntax, 1, "expected at least one thread");
    std::sort(prog_.threads.begin(), prog_.threads.end(),
              [](const ThreadProgram& a, const ThreadProgram& b) {
                return a.tid < b.tid;
              });
    for (int i = 0; i < static_cast<int>(prog_.threads.size()); ++i)
      if (prog_.threads[i].tid != i + 1)
        fail(ErrorCode::Syntax, 1,
             "thread ids must be exactly 1.." +
                 std::to_string(prog_.threads.size()));
    if (uses_fence_) {
      if (prog_.loc_id("f") >= 0)
        fail(ErrorCode::Syntax, 1,
             "location name 'f' is reserved for fences in programs using `fence`");
      prog_.fence_loc = static_cast<LocId>(prog_.locs.size());
      prog_.locs.push_back("f");
      for (auto& t : prog_.threads)
        for (auto& ins : t.code)
          if (ins.loc == -2) ins.loc = prog_.fence_loc;
    }
    check_register_use();
    return prog_;
  }

 private:
  void declare_loc(const Token& t) {
    if (kKeywords.count(t.text))
      fail(ErrorCode::Syntax, t.line, "'" + t.text + "' cannot name a location");
    if (prog_.loc_id(t.text) >= 0)
      fail(ErrorCode::Syntax, t.line, "duplicate location '" + t.text + "'");
    prog_.locs.push_back(t.text);
  }

  void parse_thread() {
    expect_ident("thread");
    Token id = lex_.next();
    if (id.kind != Token::Kind::Int || id.value < 1)
      fail(ErrorCode::Syntax, id.line, "expected positive thread id");
    cur_ = ThreadProgram{};
    cur_.tid = static_cast<Tid>(id.value);
    labels_.clear();
    pending_label_refs_.clear();
    expect_punct("{");
    while (!(lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "}"))
      parse_stmt();
    expect_punct("}");
    for (const auto& [name, uses] : pending_label_refs_) {
      auto it = labels_.find(name);
      if (it == labels_.end())
        fail(ErrorCode::DanglingLabel, uses.front().second,
             "label '" + name + "' is not defined in thread " +
                 std::to_string(cur_.tid));
      for (auto& [idx, line] : uses) cur_.code[idx].target = it->second;
    }
    for (auto& t : prog_.threads)
      if (t.tid == cur_.tid)
        fail(ErrorCode::Syntax, id.line,
             "duplicate thread id " + std::to_string(cur_.tid));
    prog_.threads.push_back(std::move(cur_));
  }

  void parse_stmt() {
    Token first = lex_.next();
    if (first.kind != Token::Kind::Ident)
      fail(ErrorCode::Syntax, first.line, "expected statement");
    // Optional "label :" prefix.
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == ":") {
      lex_.next();
      if (kKeywords.count(first.text))
        fail(ErrorCode::Syntax, first.line,
             "'" + first.text + "' cannot be used as a label");
      if (!labels_.emplace(first.text, static_cast<int>(cur_.code.size())).second)
        fail(ErrorCode::Syntax, first.line, "duplicate label '" + first.text + "'");
      first = lex_.next();
      if (first.kind != Token::Kind::Ident)
        fail(ErrorCode::Syntax, first.line, "expected instruction after label");
    }
    Instruction ins;
    ins.line = first.line;
    if (first.text == "store") {
      ins.op = Instruction::Op::Store;
      expect_punct("(");
      ins.loc = parse_loc();
      expect_punct(",");
      ins.e0 = parse_expr();
      expect_punct(")");
    } else if (first.text == "if") {
      ins.op = Instruction::Op::Branch;
      expect_punct("(");
      ins.e0 = parse_expr();
      expect_punct(")");
      expect_ident("goto");
      ref_label(ins);
    } else if (first.text == "goto") {
      ins.op = Instruction::Op::Goto;
      ref_label(ins);
    } else if (first.text == "fence") {
      // SWAP of 0 on the reserved location; patched to fence_loc later.
      ins.op = Instruction::Op::Swap;
      ins.loc = -2;
      ins.dst = -1;
      ins.e0 = Expr::constant(0);
      uses_fence_ = true;
    } else if (first.text == "halt") {
      ins.op = Instruction::Op::Halt;
    } else if (kKeywords.count(first.text)) {
      fail(ErrorCode::Syntax, first.line, "unexpected '" + first.text + "'");
    } else {
      // reg = ...
      RegId dst = reg_id(first.text);
      expect_punct("=");
      const Token& t = lex_.peek();
      if (t.kind == Token::Kind::Ident &&
          (t.text == "load" || t.text == "FADD" || t.text == "CAS" ||
           t.text == "SWAP")) {
        Token op = lex_.next();
        ins.dst = dst;
        expect_punct("(");
        ins.loc = parse_loc();
        if (op.text == "load") {
          ins.op = Instruction::Op::Load;
        } else if (op.text == "FADD") {
          ins.op = Instruction::Op::Fadd;
          expect_punct(",");
          ins.e0 = parse_expr();
        } else if (op.text == "SWAP") {
          ins.op = Instruction::Op::Swap;
          expect_punct(",");
          ins.e0 = parse_expr();
        } else {
          ins.op = Instruction::Op::Cas;
          expect_punct(",");
          ins.e0 = parse_expr();
          expect_punct(",");
          ins.e1 = parse_expr();
        }
        expect_punct(")");
      } else {
        ins.op = Instruction::Op::Assign;
        ins.dst = dst;
        ins.e0 = parse_expr();
      }
    }
    expect_punct(";");
    cur_.code.push_back(std::move(ins));
  }

  void ref_label(Instruction&) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident)
      fail(ErrorCode::Syntax, t.line, "expected label name");
    pending_label_refs_[t.text].emplace_back(static_cast<int>(cur_.code.size()),
                                             t.line);
  }

  LocId parse_loc() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident)
      fail(ErrorCode::Syntax, t.line, "expected location name");
    LocId id = prog_.loc_id(t.text);
    if (id < 0)
      fail(ErrorCode::UndeclaredLocation, t.line,
           "location '" + t.text + "' is not declared");
    return id;
  }

  RegId reg_id(const std::string& name) {
    for (size_t i = 0; i < cur_.reg_names.size(); ++i)
      if (cur_.reg_names[i] == name) return static_cast<RegId>(i);
    cur_.reg_names.push_back(name);
    return static_cast<RegId>(cur_.reg_names.size() - 1);
  }

  //  cmp := add (("="|"!="|"<"|"<=") add)?
  //  add := primary (("+"|"-") primary)*
  ExprPtr parse_expr() {
    ExprPtr lhs = parse_add();
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Punct &&
        (t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=")) {
      std::string op = lex_.next().text;
      ExprPtr rhs = parse_add();
      Expr::Op o = op == "=" ? Expr::Op::Eq
                   : op == "!=" ? Expr::Op::Ne
                   : op == "<" ? Expr::Op::Lt
                                : Expr::Op::Le;
      return Expr::binary(o, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_primary();
    while (lex_.peek().kind == Token::Kind::Punct &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      std::string op = lex_.next().text;
      ExprPtr rhs = parse_primary();
      lhs = Expr::binary(op == "+" ? Expr::Op::Add : Expr::Op::Sub, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_primary() {
    Token t = lex_.next();
    if (t.kind == Token::Kind::Int) return Expr::constant(t.value);
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::Ident && !kKeywords.count(t.text))
      return Expr::regref(reg_id(t.text));
    fail(ErrorCode::Syntax, t.line, "expected expression");
  }

  void expect_ident(const std::string& what) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident || t.text != what)
      fail(ErrorCode::Syntax, t.line, "expected '" + what + "'");
  }

  void expect_punct(const std::string& what) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Punct || t.text != what)
      fail(ErrorCode::Syntax, t.line,
           "expected '" + what + "', got '" + t.text + "'");
  }

  // A register read on a path where it was never written evaluates to 0,
  // but a register that is never assigned anywhere in its thread is
  // almost surely a typo.
  void check_register_use() {
    for (const auto& t : prog_.threads) {
      std::set<RegId> assigned;
      for (const auto& ins : t.code)
        if (ins.dst >= 0) assigned.insert(ins.dst);
      for (const auto& ins : t.code) {
        std::vector<RegId> used;
        if (ins.e0) collect_regs(*ins.e0, used);
        if (ins.e1) collect_regs(*ins.e1, used);
        for (RegId r : used)
          if (!assigned.count(r))
            fail(ErrorCode::Syntax, ins.line,
                 "register '" + t.reg_names[r] + "' is never assigned in thread " +
                     std::to_string(t.tid));
      }
    }
  }

  Lexer lex_;
  ConcurrentProgram prog_;
  ThreadProgram cur_;
  std::map<std::string, int> labels_;
  std::map<std::string, std::vector<std::pair<int, int>>> pending_label_refs_;
  bool uses_fence_ = false;
};

}  // namespace

ConcurrentProgram parse_program(const std::string& text) {
  return ProgramParser(text).parse();
}

// ---------------------------------------------------------------------------
// Assertions
// ---------------------------------------------------------------------------

struct Assertion::Node {
  enum class Kind { Cmp, And, Or, Not };
  Kind kind = Kind::Cmp;
  Expr::Op cmp = Expr::Op::Eq;
  // Leaf operands: either a register of a thread or a constant.
  Tid tid_l = 0, tid_r = 0;
  RegId reg_l = -1, reg_r = -1;
  Value const_l = 0, const_r = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

class AssertionParser {
 public:
  AssertionParser(const std::string& text, const ConcurrentProgram& p)
      : lex_(text), p_(p) {}

  Assertion parse() {
    Assertion a;
    a.root = parse_or();
    Token t = lex_.next();
    if (t.kind != Token::Kind::End)
      fail(ErrorCode::Syntax, t.line, "trailing input in assertion");
    return a;
  }

 private:
  using NodePtr = std::shared_ptr<const Assertion::Node>;

  NodePtr parse_or() {
    NodePtr lhs = parse_and();
    while (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "||") {
      lex_.next();
      auto n = std::make_shared<Assertion::Node>();
      n->kind = Assertion::Node::Kind::Or;
      n->lhs = lhs;
      n->rhs = parse_and();
      lhs = n;
    }
    return lhs;
  }

  NodePtr parse_and() {
    NodePtr lhs = parse_atom();
    while (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "&&") {
      lex_.next();
      auto n = std::make_shared<Assertion::Node>();
      n->kind = Assertion::Node::Kind::And;
      n->lhs = lhs;
      n->rhs = parse_atom();
      lhs = n;
    }
    return lhs;
  }

  NodePtr parse_atom() {
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "!") {
      lex_.next();
      auto n = std::make_shared<Assertion::Node>();
      n->kind = Assertion::Node::Kind::Not;
      n->lhs = parse_atom();
      return n;
    }
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "(") {
      lex_.next();
      NodePtr e = parse_or();
      Token t = lex_.next();
      if (t.kind != Token::Kind::Punct || t.text != ")")
        fail(ErrorCode::Syntax, t.line, "expected ')'");
      return e;
    }
    auto n = std::make_shared<Assertion::Node>();
    n->kind = Assertion::Node::Kind::Cmp;
    parse_operand(n->tid_l, n->reg_l, n->const_l);
    Token op = lex_.next();
    if (op.kind != Token::Kind::Punct ||
        (op.text != "=" && op.text != "!=" && op.text != "<" && op.text != "<="))
      fail(ErrorCode::Syntax, op.line, "expected comparison operator");
    n->cmp = op.text == "=" ? Expr::Op::Eq
             : op.text == "!=" ? Expr::Op::Ne
             : op.text == "<" ? Expr::Op::Lt
                               : Expr::Op::Le;
    parse_operand(n->tid_r, n->reg_r, n->const_r);
    return n;
  }

  void parse_operand(Tid& tid, RegId& reg, Value& constant) {
    Token t = lex_.next();
    if (t.kind == Token::Kind::Int) {
      // Either a constant or "tid:reg".
      if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == ":") {
        lex_.next();
        Token r = lex_.next();
        if (r.kind != Token::Kind::Ident)
          fail(ErrorCode::Syntax, r.line, "expected register after thread id");
        resolve(static_cast<Tid>(t.value), r.text, r.line, tid, reg);
        return;
      }
      tid = 0;
      reg = -1;
      constant = t.value;
      return;
    }
    if (t.kind == Token::Kind::Ident) {
      resolve(0, t.text, t.line, tid, reg);
      return;
    }
    fail(ErrorCode::Syntax, t.line, "expected register or constant");
  }

  void resolve(Tid want_tid, const std::string& name, int line, Tid& tid,
               RegId& reg) {
    Tid found_tid = 0;
    RegId found = -1;
    for (const auto& th : p_.threads) {
      if (want_tid != 0 && th.tid != want_tid) continue;
      for (size_t i = 0; i < th.reg_names.size(); ++i) {
        if (th.reg_names[i] != name) continue;
        if (found >= 0)
          fail(ErrorCode::Syntax, line,
               "register '" + name + "' is ambiguous; qualify as tid:" + name);
        found_tid = th.tid;
        found = static_cast<RegId>(i);
      }
    }
    if (found < 0)
      fail(ErrorCode::Syntax, line, "unknown register '" + name + "'");
    tid = found_tid;
    reg = found;
  }

  Lexer lex_;
  const ConcurrentProgram& p_;
};

Value operand_value(Tid tid, RegId reg, Value constant,
                    const std::vector<std::vector<Value>>& regs) {
  if (reg < 0) return constant;
  return regs[tid - 1][reg];
}

bool eval_node(const Assertion::Node& n,
               const std::vector<std::vector<Value>>& regs) {
  switch (n.kind) {
    case Assertion::Node::Kind::And:
      return eval_node(*n.lhs, regs) && eval_node(*n.rhs, regs);
    case Assertion::Node::Kind::Or:
      return eval_node(*n.lhs, regs) || eval_node(*n.rhs, regs);
    case Assertion::Node::Kind::Not:
      return !eval_node(*n.lhs, regs);
    case Assertion::Node::Kind::Cmp: {
      Value l = operand_value(n.tid_l, n.reg_l, n.const_l, regs);
      Value r = operand_value(n.tid_r, n.reg_r, n.const_r, regs);
      switch (n.cmp) {
        case Expr::Op::Eq:
          return l == r;
        case Expr::Op::Ne:
          return l != r;
        case Expr::Op::Lt:
          return l < r;
        case Expr::Op::Le:
          return l <= r;
        default:
          return false;
      }
    }
  }
  return false;
}

}  // namespace

bool Assertion::eval(const std::vector<std::vector<Value>>& regs) const {
  return eval_node(*root, regs);
}

Assertion parse_assertion(const std::string& text, const ConcurrentProgram& p) {
  return AssertionParser(text, p).parse();
}

}  // namespace memfair
