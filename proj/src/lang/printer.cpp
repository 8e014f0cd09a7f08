#include "relcheck/lang/printer.hpp"

#include <charconv>
#include <sstream>

namespace relcheck::lang {

namespace {

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node))
    return (b->op == BinOp::Add || b->op == BinOp::Sub) ? 1 : 2;
  return 3;
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return " + ";
    case BinOp::Sub: return " - ";
    case BinOp::Mul: return " * ";
    case BinOp::Div: return " / ";
  }
  return " ? ";
}

std::string real_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

// `leading` is true when the expression starts an additive chain, the only
// place where a bare unary minus re-parses to the same tree.
void emit(std::ostream& os, const Expr& e, bool leading);

void emit_list(std::ostream& os, const std::vector<Expr>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    emit(os, xs[i], true);
  }
}

void emit(std::ostream& os, const Expr& e, bool leading) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          os << n.value;
        } else if constexpr (std::is_same_v<T, RealLit>) {
          os << real_text(n.value);
        } else if constexpr (std::is_same_v<T, NameRef>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, ArrayRef>) {
          os << n.name << '(';
          emit_list(os, n.subscripts);
          os << ')';
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (!leading) os << '(';
          os << '-';
          bool wrap = precedence(*n.operand) < 2 || std::holds_alternative<Unary>(n.operand->node);
          if (wrap) os << '(';
          emit(os, *n.operand, true);
          if (wrap) os << ')';
          if (!leading) os << ')';
        } else if constexpr (std::is_same_v<T, Binary>) {
          int p = precedence(e);
          bool wrap_l = precedence(*n.lhs) < p;
          if (wrap_l) os << '(';
          emit(os, *n.lhs, wrap_l || (leading && p == 1));
          if (wrap_l) os << ')';
          os << op_text(n.op);
          bool wrap_r = precedence(*n.rhs) <= p;
          if (wrap_r) os << '(';
          emit(os, *n.rhs, wrap_r);
          if (wrap_r) os << ')';
        } else {
          switch (n.fn) {
            case Intrinsic::Max: os << "max"; break;
            case Intrinsic::Min: os << "min"; break;
            case Intrinsic::MyRank: os << "myrank"; break;
            case Intrinsic::NumRanks: os << "nranks"; break;
          }
          os << '(';
          emit_list(os, n.args);
          os << ')';
        }
      },
      e.node);
}

void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

void emit_stmt(std::ostream& os, const Stmt& st, int depth) {
  indent(os, depth);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          emit(os, n.target, true);
          os << " = ";
          emit(os, n.value, true);
          os << '\n';
        } else if constexpr (std::is_same_v<T, DoLoop>) {
          os << "do " << n.index << " = ";
          emit(os, n.lower, true);
          os << ", ";
          emit(os, n.upper, true);
          if (n.step) {
            os << ", ";
            emit(os, *n.step, true);
          }
          os << '\n';
          for (const auto& s : n.body) emit_stmt(os, s, depth + 1);
          indent(os, depth);
          os << "end do\n";
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          os << "call " << n.callee;
          if (!n.args.empty()) {
            os << '(';
            emit_list(os, n.args);
            os << ')';
          }
          os << '\n';
        } else if constexpr (std::is_same_v<T, Return>) {
          os << "return\n";
        } else if constexpr (std::is_same_v<T, Send>) {
          os << "send(";
          emit_list(os, {n.buffer, n.count, n.dest});
          os << ")\n";
        } else if constexpr (std::is_same_v<T, Receive>) {
          os << "receive(";
          emit_list(os, {n.buffer, n.count, n.source});
          os << ")\n";
        } else if constexpr (std::is_same_v<T, Exchange>) {
          os << "exchange(";
          emit_list(os, {n.recv, n.send, n.count});
          os << ", " << (n.dir == Direction::Left ? "left" : "right");
          if (n.dim != 1) os << ", " << n.dim;
          os << ")\n";
        } else {
          os << "setuppart(";
          emit_list(os, {n.lo, n.hi});
          os << ", " << n.lower_var << ", " << n.upper_var << ")\n";
        }
      },
      st.node);
}

void emit_constants(std::ostream& os, const std::vector<ConstDecl>& cs, int depth) {
  if (cs.empty()) return;
  indent(os, depth);
  os << "parameter (";
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i) os << ", ";
    os << cs[i].name << " = " << cs[i].value;
  }
  os << ")\n";
}

void emit_decl(std::ostream& os, const VarDecl& d) {
  os << d.name;
  if (!d.is_array()) return;
  os << '(';
  for (std::size_t i = 0; i < d.dims.size(); ++i) {
    if (i) os << ", ";
    os << d.dims[i].lo << ':' << d.dims[i].hi;
  }
  os << ')';
}

void emit_routine(std::ostream& os, const Program& p, const Routine& r) {
  if (r.is_program) {
    if (p.form == Form::Spmd) os << "spmd ";
    os << "program " << r.name << '\n';
  } else {
    os << "subroutine " << r.name << '(';
    for (std::size_t i = 0; i < r.params.size(); ++i) {
      if (i) os << ", ";
      os << r.params[i];
    }
    os << ")\n";
  }
  emit_constants(os, r.constants, 1);
  // Runs of same-typed declarations share a line.
  for (std::size_t i = 0; i < r.decls.size();) {
    std::size_t j = i;
    indent(os, 1);
    os << (r.decls[i].type == ScalarType::Integer ? "integer " : "real*8 ");
    for (; j < r.decls.size() && r.decls[j].type == r.decls[i].type; ++j) {
      if (j != i) os << ", ";
      emit_decl(os, r.decls[j]);
    }
    os << '\n';
    i = j;
  }
  if (r.result) os << "  result " << *r.result << '\n';
  for (const auto& s : r.body) emit_stmt(os, s, 1);
  os << "end " << (r.is_program ? "program " : "subroutine ") << r.name << '\n';
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  emit(os, e, true);
  return os.str();
}

std::string print_routine(const Program& p, const Routine& r) {
  std::ostringstream os;
  emit_routine(os, p, r);
  return os.str();
}

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  emit_constants(os, p.constants, 0);
  if (!p.constants.empty()) os << '\n';
  for (std::size_t i = 0; i < p.routines.size(); ++i) {
    if (i) os << '\n';
    emit_routine(os, p, p.routines[i]);
  }
  return os.str();
}

}  // namespace relcheck::lang
