#include "relcheck/lang/ast.hpp"

#include <stdexcept>

namespace relcheck::lang {

bool ArrayRef::operator==(const ArrayRef& o) const {
  return name == o.name && subscripts == o.subscripts;
}

bool IntrinsicCall::operator==(const IntrinsicCall& o) const {
  return fn == o.fn && args == o.args;
}

bool DoLoop::operator==(const DoLoop& o) const {
  return index == o.index && lower == o.lower && upper == o.upper && step == o.step &&
         body == o.body;
}

const VarDecl* Routine::find_decl(const std::string& n) const {
  for (const auto& d : decls)
    if (d.name == n) return &d;
  return nullptr;
}

const ConstDecl* Routine::find_constant(const std::string& n) const {
  for (const auto& c : constants)
    if (c.name == n) return &c;
  return nullptr;
}

int Routine::formal_position(const std::string& n) const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i] == n) return static_cast<int>(i) + 1;
  return 0;
}

const Routine& Program::main() const {
  for (const auto& r : routines)
    if (r.is_program) return r;
  throw std::logic_error("program has no main unit");
}

const Routine* Program::find(const std::string& name) const {
  for (const auto& r : routines)
    if (r.name == name) return &r;
  return nullptr;
}

Routine* Program::find(const std::string& name) {
  for (auto& r : routines)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

void number_body(std::vector<Stmt>& body, int& next) {
  for (auto& s : body) {
    s.id = next++;
    if (auto* loop = std::get_if<DoLoop>(&s.node)) number_body(loop->body, next);
  }
}

}  // namespace

void number_statements(Program& p) {
  int next = 0;
  for (auto& r : p.routines) number_body(r.body, next);
}

Expr int_lit(std::int64_t v) { return Expr{IntLit{v}, {}}; }
Expr real_lit(double v) { return Expr{RealLit{v}, {}}; }
Expr name_ref(std::string n) { return Expr{NameRef{std::move(n)}, {}}; }
Expr array_ref(std::string n, std::vector<Expr> subs) {
  return Expr{ArrayRef{std::move(n), std::move(subs)}, {}};
}
Expr binary(BinOp op, Expr lhs, Expr rhs) {
  return Expr{Binary{op, Box<Expr>(std::move(lhs)), Box<Expr>(std::move(rhs))}, {}};
}
Expr intrinsic(Intrinsic fn, std::vector<Expr> args) {
  return Expr{IntrinsicCall{fn, std::move(args)}, {}};
}
Expr offset_expr(Expr base, std::int64_t delta) {
  if (delta == 0) return base;
  if (delta > 0) return binary(BinOp::Add, std::move(base), int_lit(delta));
  return binary(BinOp::Sub, std::move(base), int_lit(-delta));
}

}  // namespace relcheck::lang
