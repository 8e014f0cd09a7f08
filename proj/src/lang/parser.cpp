#include "relcheck/lang/parser.hpp"

#include <map>
#include <set>
#include <sstream>

#include "lexer.hpp"
#include "relcheck/error.hpp"

namespace relcheck::lang {

namespace {

using detail::Tok;
using detail::Token;

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "program", "subroutine", "end",      "enddo",   "do",       "call",      "return",
      "real",    "integer",    "double",   "precision", "parameter", "send",    "receive",
      "exchange", "setuppart", "spmd",     "result",  "left",     "right",     "max",
      "min",     "myrank",     "nranks"};
  return k;
}

struct Failure {
  SyntaxError error;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ParseResult run() {
    Program prog;
    try {
      parse_file(prog);
    } catch (const Failure& f) {
      errors_.push_back(f.error);
    }
    ParseResult result;
    if (errors_.empty()) {
      number_statements(prog);
      result.program = std::move(prog);
    }
    result.errors = std::move(errors_);
    return result;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<SyntaxError> errors_;
  std::map<std::string, std::int64_t> global_consts_;
  std::map<std::string, std::int64_t> local_consts_;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(const char* w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Failure{SyntaxError{t.line, t.col, msg}};
  }
  [[noreturn]] void fail_here(const std::string& msg) const { fail(peek(), msg); }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::Newline: return "end of line";
      case Tok::End: return "end of input";
      default: return "'" + t.text + "'";
    }
  }

  const Token& expect(Tok k, const char* what) {
    if (!at(k)) fail_here(std::string("expected ") + what + ", found " + describe(peek()));
    return next();
  }
  void expect_word(const char* w) {
    if (!at_word(w)) fail_here(std::string("expected '") + w + "', found " + describe(peek()));
    next();
  }
  void expect_eol() {
    if (at(Tok::End)) return;
    expect(Tok::Newline, "end of line");
  }
  void skip_newlines() {
    while (at(Tok::Newline)) next();
  }
  void skip_line() {
    while (!at(Tok::Newline) && !at(Tok::End)) next();
    if (at(Tok::Newline)) next();
  }

  std::string expect_name(const char* what) {
    const Token& t = expect(Tok::Ident, what);
    if (keywords().count(t.text)) fail(t, "'" + t.text + "' is a reserved word");
    return t.text;
  }

  static SourceLoc loc_of(const Token& t) { return {t.line, t.col}; }

  // ---- file structure ----

  void parse_file(Program& prog) {
    skip_newlines();
    bool saw_main = false;
    bool saw_spmd = false;
    while (!at(Tok::End)) {
      try {
        if (at_word("parameter")) {
          next();
          for (auto& c : parse_parameter_list(global_consts_)) prog.constants.push_back(c);
          expect_eol();
        } else if (at_word("spmd") || at_word("program") || at_word("subroutine")) {
          bool spmd = false;
          if (at_word("spmd")) {
            next();
            spmd = true;
            if (!at_word("program")) fail_here("'spmd' must prefix the program unit");
          }
          Routine r = parse_unit();
          if (r.is_program) {
            if (saw_main) fail(toks_[pos_ == 0 ? 0 : pos_ - 1], "more than one program unit");
            saw_main = true;
            saw_spmd = spmd;
          }
          prog.routines.push_back(std::move(r));
        } else {
          fail_here("expected 'program', 'subroutine' or 'parameter', found " + describe(peek()));
        }
      } catch (const Failure& f) {
        errors_.push_back(f.error);
        // resynchronise at the next unit header
        while (!at(Tok::End) && !(at_word("program") || at_word("subroutine") || at_word("spmd")))
          skip_line();
      }
      skip_newlines();
    }
    if (!saw_main && errors_.empty()) fail(peek(), "source has no program unit");
    prog.form = saw_spmd ? Form::Spmd : Form::Serial;
  }

  std::vector<ConstDecl> parse_parameter_list(std::map<std::string, std::int64_t>& scope) {
    std::vector<ConstDecl> out;
    expect(Tok::LParen, "'('");
    while (true) {
      std::string name = expect_name("constant name");
      expect(Tok::Assign, "'='");
      std::int64_t v = parse_const_expr();
      if (scope.count(name)) fail_here("duplicate parameter '" + name + "'");
      scope[name] = v;
      out.push_back({name, v});
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      break;
    }
    expect(Tok::RParen, "')'");
    return out;
  }

  std::optional<std::int64_t> lookup_const(const std::string& n) const {
    if (auto it = local_consts_.find(n); it != local_consts_.end()) return it->second;
    if (auto it = global_consts_.find(n); it != global_consts_.end()) return it->second;
    return std::nullopt;
  }

  std::int64_t parse_const_expr() {
    const Token& start = peek();
    Expr e = parse_expr();
    auto lookup = [this](const std::string& n) { return lookup_const(n); };
    auto v = detail::fold_constant(e, lookup);
    if (!v) fail(start, "expected an integer constant expression");
    return *v;
  }

  Routine parse_unit() {
    Routine r;
    const Token& head = peek();
    r.loc = loc_of(head);
    local_consts_.clear();
    if (at_word("program")) {
      next();
      r.is_program = true;
      r.name = expect_name("program name");
    } else {
      expect_word("subroutine");
      r.name = expect_name("subroutine name");
      if (at(Tok::LParen)) {
        next();
        if (!at(Tok::RParen)) {
          while (true) {
            r.params.push_back(expect_name("parameter name"));
            if (at(Tok::Comma)) {
              next();
              continue;
            }
            break;
          }
        }
        expect(Tok::RParen, "')'");
      }
    }
    expect_eol();
    skip_newlines();

    // declarations
    while (true) {
      try {
        if (!parse_decl_line(r)) break;
      } catch (const Failure& f) {
        errors_.push_back(f.error);
        skip_line();
      }
      skip_newlines();
    }
    r.body = parse_block(false);
    // parse_block stops on `end`
    expect_word("end");
    if (at_word("program") || at_word("subroutine")) {
      const Token& kind = next();
      if ((kind.text == "program") != r.is_program) fail(kind, "mismatched 'end " + kind.text + "'");
      if (at(Tok::Ident)) {
        const Token& n = next();
        if (n.text != r.name) fail(n, "'end' names '" + n.text + "' but unit is '" + r.name + "'");
      }
    }
    expect_eol();
    return r;
  }

  bool parse_decl_line(Routine& r) {
    if (at_word("parameter")) {
      next();
      for (auto& c : parse_parameter_list(local_consts_)) r.constants.push_back(c);
      expect_eol();
      return true;
    }
    if (at_word("result")) {
      next();
      if (r.result) fail_here("duplicate 'result' declaration");
      r.result = expect_name("array name");
      expect_eol();
      return true;
    }
    ScalarType type;
    if (at_word("integer")) {
      next();
      type = ScalarType::Integer;
    } else if (at_word("double") && at_word("precision", 1)) {
      next();
      next();
      type = ScalarType::Real;
    } else if (at_word("real")) {
      next();
      type = ScalarType::Real;
      if (at(Tok::Star)) {
        next();
        const Token& width = expect(Tok::Int, "kind width");
        if (width.ival != 8 && width.ival != 4) fail(width, "unsupported real width");
      }
    } else {
      return false;
    }
    while (true) {
      VarDecl d;
      d.loc = loc_of(peek());
      d.name = expect_name("variable name");
      d.type = type;
      if (at(Tok::LParen)) {
        next();
        while (true) {
          std::int64_t a = parse_const_expr();
          Extent ext{1, a};
          if (at(Tok::Colon)) {
            next();
            ext = Extent{a, parse_const_expr()};
          }
          d.dims.push_back(ext);
          if (at(Tok::Comma)) {
            next();
            continue;
          }
          break;
        }
        expect(Tok::RParen, "')'");
      }
      r.decls.push_back(std::move(d));
      if (at(Tok::Comma)) {
        next();
        continue;
      }
      break;
    }
    expect_eol();
    return true;
  }

  // ---- statements ----

  bool at_block_end() const { return at(Tok::End) || at_word("enddo") || at_word("end"); }

  bool at_declaration() const {
    return at_word("real") || at_word("integer") || at_word("double") || at_word("parameter") ||
           at_word("result");
  }

  std::vector<Stmt> parse_block(bool in_loop) {
    std::vector<Stmt> body;
    skip_newlines();
    while (!at_block_end()) {
      try {
        if (at_declaration()) fail_here("declaration after executable statement");
        body.push_back(parse_stmt());
      } catch (const Failure& f) {
        errors_.push_back(f.error);
        skip_line();
      }
      skip_newlines();
    }
    if (at(Tok::End)) fail_here(in_loop ? "missing 'end do'" : "missing 'end'");
    return body;
  }

  Stmt parse_stmt() {
    const Token& head = peek();
    Stmt s;
    s.loc = loc_of(head);
    if (head.kind != Tok::Ident) fail(head, "expected a statement, found " + describe(head));
    const std::string& w = head.text;
    if (w == "do") {
      next();
      DoLoop loop;
      loop.index = expect_name("loop index");
      expect(Tok::Assign, "'='");
      loop.lower = parse_expr();
      expect(Tok::Comma, "','");
      loop.upper = parse_expr();
      if (at(Tok::Comma)) {
        next();
        loop.step = parse_expr();
      }
      expect_eol();
      loop.body = parse_block(true);
      if (at_word("enddo")) {
        next();
      } else {
        expect_word("end");
        if (!at_word("do")) fail_here("expected 'end do'");
        next();
      }
      expect_eol();
      s.node = std::move(loop);
      return s;
    }
    if (w == "call") {
      next();
      CallStmt call;
      const Token& name = expect(Tok::Ident, "routine name");
      call.callee = name.text;
      if (at(Tok::LParen)) {
        next();
        if (!at(Tok::RParen)) call.args = parse_expr_list();
        expect(Tok::RParen, "')'");
      }
      expect_eol();
      s.node = std::move(call);
      return s;
    }
    if (w == "return") {
      next();
      expect_eol();
      s.node = Return{};
      return s;
    }
    if (w == "send" || w == "receive") {
      next();
      expect(Tok::LParen, "'('");
      Expr buf = parse_expr();
      expect(Tok::Comma, "','");
      Expr count = parse_expr();
      expect(Tok::Comma, "','");
      Expr rank = parse_expr();
      expect(Tok::RParen, "')'");
      expect_eol();
      if (w == "send")
        s.node = Send{std::move(buf), std::move(count), std::move(rank)};
      else
        s.node = Receive{std::move(buf), std::move(count), std::move(rank)};
      return s;
    }
    if (w == "exchange") {
      next();
      expect(Tok::LParen, "'('");
      Exchange ex{parse_expr(), int_lit(0), int_lit(0)};
      expect(Tok::Comma, "','");
      ex.send = parse_expr();
      expect(Tok::Comma, "','");
      ex.count = parse_expr();
      expect(Tok::Comma, "','");
      if (at_word("left")) {
        ex.dir = Direction::Left;
      } else if (at_word("right")) {
        ex.dir = Direction::Right;
      } else {
        fail_here("expected 'left' or 'right'");
      }
      next();
      if (at(Tok::Comma)) {
        next();
        const Token& d = expect(Tok::Int, "dimension");
        ex.dim = static_cast<int>(d.ival);
      }
      expect(Tok::RParen, "')'");
      expect_eol();
      s.node = std::move(ex);
      return s;
    }
    if (w == "setuppart") {
      next();
      expect(Tok::LParen, "'('");
      SetupPart sp{parse_expr(), int_lit(0), "", ""};
      expect(Tok::Comma, "','");
      sp.hi = parse_expr();
      expect(Tok::Comma, "','");
      sp.lower_var = expect_name("variable");
      expect(Tok::Comma, "','");
      sp.upper_var = expect_name("variable");
      expect(Tok::RParen, "')'");
      expect_eol();
      s.node = std::move(sp);
      return s;
    }
    if (keywords().count(w)) fail(head, "unexpected '" + w + "'");
    // assignment
    Expr target = parse_primary();
    if (!std::holds_alternative<NameRef>(target.node) && !std::holds_alternative<ArrayRef>(target.node))
      fail(head, "assignment target must be a variable or array element");
    expect(Tok::Assign, "'='");
    Expr value = parse_expr();
    expect_eol();
    s.node = Assign{std::move(target), std::move(value)};
    return s;
  }

  // ---- expressions ----

  std::vector<Expr> parse_expr_list() {
    std::vector<Expr> out;
    out.push_back(parse_expr());
    while (at(Tok::Comma)) {
      next();
      out.push_back(parse_expr());
    }
    return out;
  }

  Expr parse_expr() {
    const Token& start = peek();
    Expr lhs;
    if (at(Tok::Minus)) {
      next();
      Expr operand = parse_term();
      lhs = Expr{Unary{Box<Expr>(std::move(operand))}, loc_of(start)};
    } else {
      if (at(Tok::Plus)) next();
      lhs = parse_term();
    }
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const Token& op = next();
      Expr rhs = parse_term();
      lhs = Expr{Binary{op.kind == Tok::Plus ? BinOp::Add : BinOp::Sub, Box<Expr>(std::move(lhs)),
                        Box<Expr>(std::move(rhs))},
                 loc_of(op)};
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_primary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      const Token& op = next();
      Expr rhs = parse_primary();
      lhs = Expr{Binary{op.kind == Tok::Star ? BinOp::Mul : BinOp::Div, Box<Expr>(std::move(lhs)),
                        Box<Expr>(std::move(rhs))},
                 loc_of(op)};
    }
    return lhs;
  }

  Expr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        next();
        return Expr{IntLit{t.ival}, loc_of(t)};
      case Tok::Real:
        next();
        return Expr{RealLit{t.rval}, loc_of(t)};
      case Tok::LParen: {
        next();
        Expr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        next();
        static const std::map<std::string, Intrinsic> intrinsics = {
            {"max", Intrinsic::Max},
            {"min", Intrinsic::Min},
            {"myrank", Intrinsic::MyRank},
            {"nranks", Intrinsic::NumRanks}};
        auto intr = intrinsics.find(t.text);
        if (intr != intrinsics.end()) {
          expect(Tok::LParen, "'('");
          std::vector<Expr> args;
          if (!at(Tok::RParen)) args = parse_expr_list();
          expect(Tok::RParen, "')'");
          return Expr{IntrinsicCall{intr->second, std::move(args)}, loc_of(t)};
        }
        if (keywords().count(t.text)) fail(t, "unexpected '" + t.text + "' in expression");
        if (at(Tok::LParen)) {
          next();
          std::vector<Expr> subs = parse_expr_list();
          expect(Tok::RParen, "')'");
          return Expr{ArrayRef{t.text, std::move(subs)}, loc_of(t)};
        }
        return Expr{NameRef{t.text}, loc_of(t)};
      }
      default:
        fail(t, "expected an expression, found " + describe(t));
    }
  }
};

}  // namespace

ParseResult parse(std::string_view source) {
  auto toks = detail::lex(source);
  for (const auto& t : toks) {
    if (t.kind == Tok::Invalid) {
      ParseResult r;
      r.errors.push_back({t.line, t.col, "invalid character or literal '" + t.text + "'"});
      return r;
    }
  }
  return Parser(std::move(toks)).run();
}

std::string format_errors(const std::vector<SyntaxError>& errors) {
  std::ostringstream os;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i) os << '\n';
    os << errors[i].line << ':' << errors[i].col << ": " << errors[i].message;
  }
  return os.str();
}

Program parse_or_throw(std::string_view source) {
  auto result = parse(source);
  if (!result.ok()) throw Error("SyntaxError", format_errors(result.errors));
  return std::move(*result.program);
}

}  // namespace relcheck::lang
