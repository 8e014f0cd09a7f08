#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace relcheck::lang {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

// Heap cell with value semantics; lets recursive AST nodes be copied and
// compared like plain values.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class ScalarType { Integer, Real };
enum class BinOp { Add, Sub, Mul, Div };
enum class Intrinsic { Max, Min, MyRank, NumRanks };
enum class Direction { Left, Right };
enum class Form { Serial, Spmd };

struct Expr;

struct IntLit {
  std::int64_t value = 0;
  bool operator==(const IntLit&) const = default;
};
struct RealLit {
  double value = 0.0;
  bool operator==(const RealLit&) const = default;
};
// A scalar variable, loop index, named constant, or (as a call argument) a
// whole array.
struct NameRef {
  std::string name;
  bool operator==(const NameRef&) const = default;
};
struct ArrayRef {
  std::string name;
  std::vector<Expr> subscripts;
  bool operator==(const ArrayRef&) const;
};
struct Unary {
  Box<Expr> operand;
  bool operator==(const Unary&) const = default;
};
struct Binary {
  BinOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const Binary&) const = default;
};
struct IntrinsicCall {
  Intrinsic fn;
  std::vector<Expr> args;
  bool operator==(const IntrinsicCall&) const;
};

struct Expr {
  using Node = std::variant<IntLit, RealLit, NameRef, ArrayRef, Unary, Binary, IntrinsicCall>;
  Node node;
  SourceLoc loc;

  bool operator==(const Expr& other) const { return node == other.node; }
};

struct Stmt;

struct Assign {
  Expr target;  // NameRef or ArrayRef
  Expr value;
  bool operator==(const Assign&) const = default;
};
struct DoLoop {
  std::string index;
  Expr lower;
  Expr upper;
  std::optional<Expr> step;
  std::vector<Stmt> body;
  bool operator==(const DoLoop&) const;
};
struct CallStmt {
  std::string callee;
  std::vector<Expr> args;
  bool operator==(const CallStmt&) const = default;
};
struct Return {
  bool operator==(const Return&) const = default;
};
struct Send {
  Expr buffer;
  Expr count;
  Expr dest;
  bool operator==(const Send&) const = default;
};
struct Receive {
  Expr buffer;
  Expr count;
  Expr source;
  bool operator==(const Receive&) const = default;
};
// exchange(recv, send, count, dir[, dim]). RIGHT fills the right halo from the
// right neighbour and ships the low boundary to the left neighbour; LEFT is
// the mirror image. Elements step along dimension `dim`.
struct Exchange {
  Expr recv;
  Expr send;
  Expr count;
  Direction dir = Direction::Left;
  int dim = 1;
  bool operator==(const Exchange&) const = default;
};
// setuppart(lo, hi, lower_var, upper_var): stores this rank's block of lo..hi.
struct SetupPart {
  Expr lo;
  Expr hi;
  std::string lower_var;
  std::string upper_var;
  bool operator==(const SetupPart&) const = default;
};

struct Stmt {
  using Node = std::variant<Assign, DoLoop, CallStmt, Return, Send, Receive, Exchange, SetupPart>;
  Node node;
  int id = -1;
  SourceLoc loc;

  bool operator==(const Stmt& other) const { return node == other.node; }
};

struct Extent {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  std::int64_t size() const { return hi - lo + 1; }
  bool operator==(const Extent&) const = default;
};

struct VarDecl {
  std::string name;
  ScalarType type = ScalarType::Real;
  std::vector<Extent> dims;  // empty for scalars
  SourceLoc loc;

  bool is_array() const { return !dims.empty(); }
  bool operator==(const VarDecl& o) const {
    return name == o.name && type == o.type && dims == o.dims;
  }
};

struct ConstDecl {
  std::string name;
  std::int64_t value = 0;
  bool operator==(const ConstDecl&) const = default;
};

struct Routine {
  std::string name;
  bool is_program = false;
  std::vector<std::string> params;
  std::vector<ConstDecl> constants;
  std::vector<VarDecl> decls;
  std::optional<std::string> result;  // array printed by the "result routine"
  std::vector<Stmt> body;
  SourceLoc loc;

  const VarDecl* find_decl(const std::string& n) const;
  const ConstDecl* find_constant(const std::string& n) const;
  // 1-based position of a formal parameter, or 0.
  int formal_position(const std::string& n) const;

  bool operator==(const Routine& o) const {
    return name == o.name && is_program == o.is_program && params == o.params &&
           constants == o.constants && decls == o.decls && result == o.result && body == o.body;
  }
};

struct Program {
  Form form = Form::Serial;
  std::vector<ConstDecl> constants;  // file-scope parameters
  std::vector<Routine> routines;     // source order; exactly one is_program

  const Routine& main() const;
  const Routine* find(const std::string& name) const;
  Routine* find(const std::string& name);

  bool operator==(const Program&) const = default;
};

// Statement ids are assigned in preorder across routines in source order.
void number_statements(Program& p);

// Depth-first visit of every statement (including loop bodies).
template <class F>
void for_each_stmt(const std::vector<Stmt>& body, F&& f) {
  for (const auto& s : body) {
    f(s);
    if (const auto* loop = std::get_if<DoLoop>(&s.node)) for_each_stmt(loop->body, f);
  }
}

// Affine subscript `var + offset`; `var` empty for a constant subscript.
struct Affine {
  std::string var;
  std::int64_t offset = 0;
  bool operator==(const Affine&) const = default;
};

// Recognises `v`, `v + c`, `v - c`, `c + v`, and constant expressions whose
// names resolve through `constant`; returns nullopt for anything richer.
template <class ConstLookup>
std::optional<Affine> affine_of(const Expr& e, ConstLookup&& constant);

// Convenience builders used by the transformer and tests.
Expr int_lit(std::int64_t v);
Expr real_lit(double v);
Expr name_ref(std::string n);
Expr array_ref(std::string n, std::vector<Expr> subs);
Expr binary(BinOp op, Expr lhs, Expr rhs);
Expr intrinsic(Intrinsic fn, std::vector<Expr> args);
// `base + delta`, folding a zero delta and emitting `base - |delta|` for
// negative deltas.
Expr offset_expr(Expr base, std::int64_t delta);

}  // namespace relcheck::lang

#include "relcheck/lang/affine_inl.hpp"
