#pragma once

namespace relcheck::lang {

namespace detail {

template <class ConstLookup>
std::optional<std::int64_t> fold_constant(const Expr& e, ConstLookup& constant) {
  if (const auto* lit = std::get_if<IntLit>(&e.node)) return lit->value;
  if (const auto* ref = std::get_if<NameRef>(&e.node)) return constant(ref->name);
  if (const auto* un = std::get_if<Unary>(&e.node)) {
    auto v = fold_constant(*un->operand, constant);
    if (v) return -*v;
    return std::nullopt;
  }
  if (const auto* bin = std::get_if<Binary>(&e.node)) {
    auto l = fold_constant(*bin->lhs, constant);
    auto r = fold_constant(*bin->rhs, constant);
    if (!l || !r) return std::nullopt;
    switch (bin->op) {
      case BinOp::Add: return *l + *r;
      case BinOp::Sub: return *l - *r;
      case BinOp::Mul: return *l * *r;
      case BinOp::Div:
        if (*r == 0) return std::nullopt;
        return *l / *r;
    }
  }
  return std::nullopt;
}

}  // namespace detail

template <class ConstLookup>
std::optional<Affine> affine_of(const Expr& e, ConstLookup&& constant) {
  if (auto c = detail::fold_constant(e, constant)) return Affine{"", *c};
  if (const auto* ref = std::get_if<NameRef>(&e.node)) return Affine{ref->name, 0};
  if (const auto* bin = std::get_if<Binary>(&e.node)) {
    if (bin->op != BinOp::Add && bin->op != BinOp::Sub) return std::nullopt;
    auto l = affine_of(*bin->lhs, constant);
    auto r = affine_of(*bin->rhs, constant);
    if (!l || !r) return std::nullopt;
    if (bin->op == BinOp::Add) {
      if (!l->var.empty() && !r->var.empty()) return std::nullopt;
      return Affine{l->var.empty() ? r->var : l->var, l->offset + r->offset};
    }
    if (!r->var.empty()) return std::nullopt;
    return Affine{l->var, l->offset - r->offset};
  }
  return std::nullopt;
}

}  // namespace relcheck::lang
