#include "relcheck/lang/typecheck.hpp"

#include <set>
#include <sstream>

#include "relcheck/error.hpp"

namespace relcheck::lang {

const Symbol* RoutineScope::find(const std::string& n) const {
  auto it = symbols.find(n);
  return it == symbols.end() ? nullptr : &it->second;
}

const RoutineScope& SymbolTable::scope(const std::string& routine) const {
  auto it = routines.find(routine);
  if (it == routines.end()) throw Error("UnknownRoutine", "no routine named '" + routine + "'");
  return it->second;
}

const Symbol* SymbolTable::lookup(const std::string& routine, const std::string& name) const {
  auto it = routines.find(routine);
  if (it == routines.end()) return nullptr;
  return it->second.find(name);
}

namespace {

class Checker {
 public:
  Checker(const Program& p, SymbolTable& table) : prog_(p), table_(table) {}

  void run() {
    std::set<std::string> names;
    for (const auto& r : prog_.routines) {
      if (!names.insert(r.name).second)
        throw Error("DuplicateRoutine", at(r.loc) + "routine '" + r.name + "' defined twice");
    }
    for (const auto& r : prog_.routines) declare(r);
    for (const auto& r : prog_.routines) check_body(r);
  }

 private:
  const Program& prog_;
  SymbolTable& table_;
  const Routine* routine_ = nullptr;
  RoutineScope* scope_ = nullptr;
  std::vector<std::string> active_loops_;

  std::string at(SourceLoc loc) const {
    std::ostringstream os;
    if (routine_) os << routine_->name << ':';
    os << loc.line << ':' << loc.col << ": ";
    return os.str();
  }

  [[noreturn]] void fail(const char* code, SourceLoc loc, const std::string& msg) const {
    throw Error(code, at(loc) + msg);
  }

  void declare(const Routine& r) {
    routine_ = &r;
    RoutineScope& s = table_.routines[r.name];
    s.name = r.name;
    scope_ = &s;
    for (const auto& c : prog_.constants) {
      Symbol sym;
      sym.kind = Symbol::Kind::Constant;
      sym.type = ScalarType::Integer;
      sym.value = c.value;
      s.symbols[c.name] = sym;
    }
    for (const auto& c : r.constants) {
      if (s.symbols.count(c.name))
        fail("DuplicateDeclaration", r.loc, "'" + c.name + "' declared more than once");
      Symbol sym;
      sym.kind = Symbol::Kind::Constant;
      sym.type = ScalarType::Integer;
      sym.value = c.value;
      s.symbols[c.name] = sym;
    }
    for (const auto& d : r.decls) {
      if (s.symbols.count(d.name))
        fail("DuplicateDeclaration", d.loc, "'" + d.name + "' declared more than once");
      Symbol sym;
      sym.type = d.type;
      if (d.is_array()) {
        if (d.dims.size() > 2)
          fail("UnsupportedRank", d.loc, "array '" + d.name + "' has rank " +
                                             std::to_string(d.dims.size()) + "; only 1 or 2 allowed");
        for (const auto& e : d.dims)
          if (e.hi < e.lo)
            fail("InvalidBounds", d.loc, "array '" + d.name + "' has an empty dimension");
        if (d.type != ScalarType::Real)
          fail("TypeMismatch", d.loc, "array '" + d.name + "' must be real");
        sym.kind = Symbol::Kind::Array;
        sym.dims = d.dims;
      } else {
        sym.kind = Symbol::Kind::Scalar;
      }
      sym.formal = r.formal_position(d.name);
      s.symbols[d.name] = sym;
    }
    std::set<std::string> seen;
    for (const auto& p : r.params) {
      if (!seen.insert(p).second)
        fail("DuplicateDeclaration", r.loc, "formal '" + p + "' repeated");
      if (!r.find_decl(p)) fail("UndeclaredName", r.loc, "formal '" + p + "' has no declaration");
    }
    if (r.result) {
      const Symbol* res = s.find(*r.result);
      if (!res) fail("UndeclaredName", r.loc, "result array '" + *r.result + "' is not declared");
      if (!res->is_array()) fail("RankMismatch", r.loc, "result '" + *r.result + "' is not an array");
    }
    // Loop indices without a declaration become implicit integer locals.
    for_each_stmt(r.body, [&](const Stmt& st) {
      if (const auto* loop = std::get_if<DoLoop>(&st.node)) {
        if (!s.symbols.count(loop->index)) {
          Symbol sym;
          sym.kind = Symbol::Kind::LoopIndex;
          sym.type = ScalarType::Integer;
          s.symbols[loop->index] = sym;
        }
      }
    });
  }

  const Symbol& resolve(const std::string& n, SourceLoc loc) const {
    const Symbol* sym = scope_->find(n);
    if (!sym) fail("UndeclaredName", loc, "'" + n + "' is not declared");
    return *sym;
  }

  void require_spmd(SourceLoc loc, const char* what) const {
    if (prog_.form != Form::Spmd)
      fail("CommInSerialProgram", loc, std::string(what) + " is only legal in an spmd program");
  }

  ScalarType check_expr(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> ScalarType {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return ScalarType::Integer;
          } else if constexpr (std::is_same_v<T, RealLit>) {
            return ScalarType::Real;
          } else if constexpr (std::is_same_v<T, NameRef>) {
            const Symbol& s = resolve(n.name, e.loc);
            if (s.is_array())
              fail("RankMismatch", e.loc, "array '" + n.name + "' used without subscripts");
            return s.type;
          } else if constexpr (std::is_same_v<T, ArrayRef>) {
            check_element(n, e.loc);
            return ScalarType::Real;
          } else if constexpr (std::is_same_v<T, Unary>) {
            return check_expr(*n.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            ScalarType l = check_expr(*n.lhs);
            ScalarType r = check_expr(*n.rhs);
            return (l == ScalarType::Integer && r == ScalarType::Integer) ? ScalarType::Integer
                                                                          : ScalarType::Real;
          } else {
            switch (n.fn) {
              case Intrinsic::MyRank:
              case Intrinsic::NumRanks:
                require_spmd(e.loc, n.fn == Intrinsic::MyRank ? "myrank()" : "nranks()");
                if (!n.args.empty()) fail("ArgumentMismatch", e.loc, "intrinsic takes no arguments");
                return ScalarType::Integer;
              case Intrinsic::Max:
              case Intrinsic::Min: {
                if (n.args.size() < 2)
                  fail("ArgumentMismatch", e.loc, "max/min need at least two arguments");
                ScalarType t = ScalarType::Integer;
                for (const auto& a : n.args)
                  if (check_expr(a) == ScalarType::Real) t = ScalarType::Real;
                return t;
              }
            }
            return ScalarType::Real;
          }
        },
        e.node);
  }

  void check_element(const ArrayRef& ref, SourceLoc loc) {
    const Symbol& s = resolve(ref.name, loc);
    if (!s.is_array()) fail("RankMismatch", loc, "'" + ref.name + "' is not an array");
    if (s.dims.size() != ref.subscripts.size())
      fail("RankMismatch", loc,
           "'" + ref.name + "' has rank " + std::to_string(s.dims.size()) + " but " +
               std::to_string(ref.subscripts.size()) + " subscripts given");
    for (const auto& sub : ref.subscripts) {
      if (check_expr(sub) != ScalarType::Integer)
        fail("TypeMismatch", sub.loc, "subscript of '" + ref.name + "' is not an integer");
      auto lookup = [&](const std::string& n) -> std::optional<std::int64_t> {
        const Symbol* c = scope_->find(n);
        if (c && c->kind == Symbol::Kind::Constant) return c->value;
        return std::nullopt;
      };
      auto aff = affine_of(sub, lookup);
      if (!aff)
        fail("UnsupportedSubscript", sub.loc,
             "subscript of '" + ref.name + "' must be an index plus or minus a constant");
    }
  }

  void check_int(const Expr& e, const char* what) {
    if (check_expr(e) != ScalarType::Integer)
      fail("TypeMismatch", e.loc, std::string(what) + " must be an integer expression");
  }

  void check_buffer(const Expr& e, const char* what) {
    if (const auto* ref = std::get_if<ArrayRef>(&e.node)) {
      check_element(*ref, e.loc);
      return;
    }
    if (const auto* name = std::get_if<NameRef>(&e.node)) {
      if (resolve(name->name, e.loc).is_array()) return;
    }
    fail("TypeMismatch", e.loc, std::string(what) + " must be an array or array element");
  }

  void check_scalar_target(const std::string& n, SourceLoc loc) {
    const Symbol& s = resolve(n, loc);
    if (s.kind == Symbol::Kind::Constant) fail("TypeMismatch", loc, "cannot assign to parameter '" + n + "'");
    if (s.is_array()) fail("RankMismatch", loc, "array '" + n + "' assigned without subscripts");
    for (const auto& idx : active_loops_)
      if (idx == n) fail("TypeMismatch", loc, "loop index '" + n + "' assigned inside its loop");
  }

  void check_call(const CallStmt& c, SourceLoc loc) {
    if (is_resident_name(c.callee)) {
      for (const auto& a : c.args) {
        if (const auto* name = std::get_if<NameRef>(&a.node)) {
          resolve(name->name, a.loc);
          continue;
        }
        check_expr(a);
      }
      return;
    }
    const Routine* callee = prog_.find(c.callee);
    if (!callee || callee->is_program)
      fail("UnknownRoutine", loc, "call to unknown subroutine '" + c.callee + "'");
    if (callee->params.size() != c.args.size())
      fail("ArgumentMismatch", loc,
           "'" + c.callee + "' expects " + std::to_string(callee->params.size()) + " arguments, got " +
               std::to_string(c.args.size()));
    const RoutineScope& cs = table_.routines.at(callee->name);
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      const Symbol& formal = *cs.find(callee->params[i]);
      const Expr& actual = c.args[i];
      if (formal.is_array()) {
        const auto* name = std::get_if<NameRef>(&actual.node);
        const Symbol* s = name ? &resolve(name->name, actual.loc) : nullptr;
        if (!s || !s->is_array())
          fail("ArgumentMismatch", actual.loc,
               "argument " + std::to_string(i + 1) + " of '" + c.callee + "' must be an array");
        if (s->dims != formal.dims)
          fail("ArgumentMismatch", actual.loc,
               "array '" + name->name + "' does not match the shape of formal '" + callee->params[i] +
                   "'");
        continue;
      }
      if (const auto* name = std::get_if<NameRef>(&actual.node)) {
        if (resolve(name->name, actual.loc).is_array())
          fail("ArgumentMismatch", actual.loc,
               "argument " + std::to_string(i + 1) + " of '" + c.callee + "' must be a scalar");
      }
      ScalarType t = check_expr(actual);
      if (formal.type == ScalarType::Integer && t != ScalarType::Integer)
        fail("TypeMismatch", actual.loc, "integer formal '" + callee->params[i] + "' given a real value");
    }
  }

  void check_stmts(const std::vector<Stmt>& body) {
    for (const auto& s : body) check_stmt(s);
  }

  void check_stmt(const Stmt& st) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Assign>) {
            ScalarType target;
            if (const auto* name = std::get_if<NameRef>(&n.target.node)) {
              check_scalar_target(name->name, n.target.loc);
              target = resolve(name->name, n.target.loc).type;
            } else {
              check_element(std::get<ArrayRef>(n.target.node), n.target.loc);
              target = ScalarType::Real;
            }
            ScalarType value = check_expr(n.value);
            if (target == ScalarType::Integer && value != ScalarType::Integer)
              fail("TypeMismatch", st.loc, "real value assigned to an integer variable");
          } else if constexpr (std::is_same_v<T, DoLoop>) {
            const Symbol& idx = resolve(n.index, st.loc);
            if (!idx.is_integer_scalar() || idx.kind == Symbol::Kind::Constant)
              fail("TypeMismatch", st.loc, "loop index '" + n.index + "' must be an integer variable");
            for (const auto& a : active_loops_)
              if (a == n.index) fail("TypeMismatch", st.loc, "loop index '" + n.index + "' reused");
            check_int(n.lower, "loop bound");
            check_int(n.upper, "loop bound");
            if (n.step) check_int(*n.step, "loop step");
            active_loops_.push_back(n.index);
            check_stmts(n.body);
            active_loops_.pop_back();
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            check_call(n, st.loc);
          } else if constexpr (std::is_same_v<T, Return>) {
          } else if constexpr (std::is_same_v<T, Send> || std::is_same_v<T, Receive>) {
            require_spmd(st.loc, std::is_same_v<T, Send> ? "send" : "receive");
            check_buffer(n.buffer, "message buffer");
            check_int(n.count, "message count");
            if constexpr (std::is_same_v<T, Send>)
              check_int(n.dest, "destination rank");
            else
              check_int(n.source, "source rank");
          } else if constexpr (std::is_same_v<T, Exchange>) {
            require_spmd(st.loc, "exchange");
            check_buffer(n.recv, "exchange buffer");
            check_buffer(n.send, "exchange buffer");
            check_int(n.count, "exchange count");
            for (const Expr* b : {&n.recv, &n.send}) {
              std::string arr;
              if (const auto* r = std::get_if<ArrayRef>(&b->node)) arr = r->name;
              if (const auto* r = std::get_if<NameRef>(&b->node)) arr = r->name;
              if (n.dim < 1 || n.dim > static_cast<int>(resolve(arr, b->loc).dims.size()))
                fail("RankMismatch", st.loc, "exchange dimension out of range");
            }
          } else if constexpr (std::is_same_v<T, SetupPart>) {
            require_spmd(st.loc, "setuppart");
            check_int(n.lo, "partition bound");
            check_int(n.hi, "partition bound");
            for (const auto& v : {n.lower_var, n.upper_var}) {
              check_scalar_target(v, st.loc);
              if (!resolve(v, st.loc).is_integer_scalar())
                fail("TypeMismatch", st.loc, "'" + v + "' must be an integer variable");
            }
          }
        },
        st.node);
  }

  void check_body(const Routine& r) {
    routine_ = &r;
    scope_ = &table_.routines.at(r.name);
    active_loops_.clear();
    check_stmts(r.body);
  }
};

}  // namespace

SymbolTable typecheck(const Program& p) {
  SymbolTable table;
  Checker(p, table).run();
  return table;
}

}  // namespace relcheck::lang
