#include "interpreter.hpp"

#include <algorithm>
#include <sstream>

#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/distribution.hpp"

namespace relcheck::runtime {

using namespace relcheck::lang;

namespace {

// Restores the frame stack when a call unwinds, normally or by exception.
struct StackGuard {
  std::vector<Frame*>& stack;
  StackGuard(std::vector<Frame*>& s, Frame* f) : stack(s) { stack.push_back(f); }
  ~StackGuard() { stack.pop_back(); }
};

std::string index_text(const std::int64_t* idx, std::size_t n) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < n; ++k) os << (k ? ", " : "") << idx[k];
  os << ')';
  return os.str();
}

}  // namespace

Interpreter::Interpreter(Process& proc, const Program& p)
    : proc_(proc), trace_writes_(proc.options().trace_writes) {
  SymbolTable st = typecheck(p);
  routines_.resize(p.routines.size());
  for (std::size_t k = 0; k < p.routines.size(); ++k) {
    const Routine& r = p.routines[k];
    index_of_[r.name] = int(k);
    if (r.is_program) main_ = int(k);
    CRoutine& c = routines_[k];
    c.name = r.name;
    for (const auto& [name, sym] : st.scope(r.name).symbols) {
      if (sym.kind == Symbol::Kind::Constant) continue;
      VarInfo v;
      v.name = name;
      v.kind = sym.is_array() ? VarInfo::Array
                              : (sym.type == ScalarType::Integer ? VarInfo::Int : VarInfo::Real);
      v.dims = sym.dims;
      v.formal = sym.formal;
      c.slot_of[name] = int(c.vars.size());
      c.vars.push_back(std::move(v));
    }
    c.formal_slots.assign(r.params.size(), -1);
    for (std::size_t v = 0; v < c.vars.size(); ++v)
      if (c.vars[v].formal > 0) c.formal_slots[c.vars[v].formal - 1] = int(v);
  }
  for (std::size_t k = 0; k < p.routines.size(); ++k) {
    const Routine& r = p.routines[k];
    const RoutineScope& scope = st.scope(r.name);
    for (const auto& s : r.body) routines_[k].body.push_back(compile_stmt(s, routines_[k], scope));
  }
  invocations_.assign(routines_.size(), 0);
}

CExpr Interpreter::compile_expr(const Expr& e, const CRoutine& r, const RoutineScope& scope) {
  CExpr c;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          c.op = CExpr::ILit;
          c.i = n.value;
        } else if constexpr (std::is_same_v<T, RealLit>) {
          c.op = CExpr::RLit;
          c.r = n.value;
          c.is_int = false;
        } else if constexpr (std::is_same_v<T, NameRef>) {
          const Symbol* s = scope.find(n.name);
          if (s && s->kind == Symbol::Kind::Constant) {
            c.op = CExpr::ILit;
            c.i = s->value;
          } else {
            c.slot = r.slot_of.at(n.name);
            c.is_int = r.vars[c.slot].kind == VarInfo::Int;
            c.op = c.is_int ? CExpr::LoadI : CExpr::LoadR;
          }
        } else if constexpr (std::is_same_v<T, ArrayRef>) {
          c.op = CExpr::Elem;
          c.is_int = false;
          c.slot = r.slot_of.at(n.name);
          for (const auto& s : n.subscripts) c.kids.push_back(compile_expr(s, r, scope));
        } else if constexpr (std::is_same_v<T, Unary>) {
          c.op = CExpr::Neg;
          c.kids.push_back(compile_expr(*n.operand, r, scope));
          c.is_int = c.kids[0].is_int;
        } else if constexpr (std::is_same_v<T, Binary>) {
          switch (n.op) {
            case BinOp::Add: c.op = CExpr::Add; break;
            case BinOp::Sub: c.op = CExpr::Sub; break;
            case BinOp::Mul: c.op = CExpr::Mul; break;
            case BinOp::Div: c.op = CExpr::Div; break;
          }
          c.kids.push_back(compile_expr(*n.lhs, r, scope));
          c.kids.push_back(compile_expr(*n.rhs, r, scope));
          c.is_int = c.kids[0].is_int && c.kids[1].is_int;
        } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
          switch (n.fn) {
            case Intrinsic::Max: c.op = CExpr::Max; break;
            case Intrinsic::Min: c.op = CExpr::Min; break;
            case Intrinsic::MyRank: c.op = CExpr::MyRank; break;
            case Intrinsic::NumRanks: c.op = CExpr::NRanks; break;
          }
          for (const auto& a : n.args) {
            c.kids.push_back(compile_expr(a, r, scope));
            c.is_int = c.is_int && c.kids.back().is_int;
          }
        }
      },
      e.node);
  return c;
}

CStmt Interpreter::compile_stmt(const Stmt& s, const CRoutine& r, const RoutineScope& scope) {
  CStmt c;
  c.id = s.id;
  c.line = s.loc.line;
  auto buffer = [&](const Expr& e, int& slot, std::vector<CExpr>& subs) {
    if (const auto* a = std::get_if<ArrayRef>(&e.node)) {
      slot = r.slot_of.at(a->name);
      for (const auto& x : a->subscripts) subs.push_back(compile_expr(x, r, scope));
    } else if (const auto* n = std::get_if<NameRef>(&e.node)) {
      slot = r.slot_of.at(n->name);
      for (const auto& d : r.vars[slot].dims) {
        CExpr lo;
        lo.i = d.lo;
        subs.push_back(lo);
      }
    }
  };
  auto args = [&](const std::vector<Expr>& actuals) {
    std::vector<CArg> out;
    for (const auto& a : actuals) {
      CArg arg;
      const auto* n = std::get_if<NameRef>(&a.node);
      auto it = n ? r.slot_of.find(n->name) : r.slot_of.end();
      if (it != r.slot_of.end()) {
        arg.slot = it->second;
        arg.kind = r.vars[arg.slot].kind == VarInfo::Array ? CArg::Array : CArg::Ref;
      } else {
        arg.value = compile_expr(a, r, scope);
      }
      out.push_back(std::move(arg));
    }
    return out;
  };
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Assign>) {
          c.a = compile_expr(n.value, r, scope);
          if (const auto* t = std::get_if<ArrayRef>(&n.target.node)) {
            c.op = CStmt::AssignElem;
            c.slot = r.slot_of.at(t->name);
            for (const auto& x : t->subscripts) c.subs.push_back(compile_expr(x, r, scope));
          } else {
            const auto& name = std::get<NameRef>(n.target.node).name;
            c.slot = r.slot_of.at(name);
            c.op = r.vars[c.slot].kind == VarInfo::Int ? CStmt::AssignI : CStmt::AssignR;
          }
        } else if constexpr (std::is_same_v<T, DoLoop>) {
          c.op = CStmt::Do;
          c.slot = r.slot_of.at(n.index);
          c.a = compile_expr(n.lower, r, scope);
          c.b = compile_expr(n.upper, r, scope);
          if (n.step) {
            c.c = compile_expr(*n.step, r, scope);
            c.has_step = true;
          }
          for (const auto& x : n.body) c.body.push_back(compile_stmt(x, r, scope));
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          c.args = args(n.args);
          if (is_resident_name(n.callee)) {
            c.op = CStmt::Resident;
            c.name = n.callee;
          } else {
            c.op = CStmt::Call;
            c.callee = index_of_.at(n.callee);
          }
        } else if constexpr (std::is_same_v<T, Return>) {
          c.op = CStmt::Return;
        } else if constexpr (std::is_same_v<T, Send>) {
          c.op = CStmt::Send;
          buffer(n.buffer, c.slot, c.subs);
          c.b = compile_expr(n.count, r, scope);
          c.c = compile_expr(n.dest, r, scope);
        } else if constexpr (std::is_same_v<T, Receive>) {
          c.op = CStmt::Receive;
          buffer(n.buffer, c.slot, c.subs);
          c.b = compile_expr(n.count, r, scope);
          c.c = compile_expr(n.source, r, scope);
        } else if constexpr (std::is_same_v<T, Exchange>) {
          c.op = CStmt::Exchange;
          buffer(n.recv, c.slot, c.subs);
          buffer(n.send, c.slot2, c.subs2);
          c.b = compile_expr(n.count, r, scope);
          c.dir = n.dir;
          c.dim = n.dim;
        } else if constexpr (std::is_same_v<T, SetupPart>) {
          c.op = CStmt::SetupPart;
          c.a = compile_expr(n.lo, r, scope);
          c.b = compile_expr(n.hi, r, scope);
          c.slot = r.slot_of.at(n.lower_var);
          c.slot2 = r.slot_of.at(n.upper_var);
        }
      },
      s.node);
  return c;
}

void Interpreter::fault(Frame& f, const std::string& msg) const {
  throw Error("RuntimeFault", f.routine->name + ":" + std::to_string(f.line) + ": " + msg);
}

std::int64_t Interpreter::eval_int(const CExpr& e, Frame& f) {
  switch (e.op) {
    case CExpr::ILit: return e.i;
    case CExpr::LoadI: return f.cells[e.slot]->integer;
    case CExpr::Neg: return -eval_int(e.kids[0], f);
    case CExpr::Add: return eval_int(e.kids[0], f) + eval_int(e.kids[1], f);
    case CExpr::Sub: return eval_int(e.kids[0], f) - eval_int(e.kids[1], f);
    case CExpr::Mul: return eval_int(e.kids[0], f) * eval_int(e.kids[1], f);
    case CExpr::Div: {
      std::int64_t d = eval_int(e.kids[1], f);
      if (d == 0) fault(f, "integer division by zero");
      return eval_int(e.kids[0], f) / d;
    }
    case CExpr::Max:
    case CExpr::Min: {
      std::int64_t v = eval_int(e.kids[0], f);
      for (std::size_t k = 1; k < e.kids.size(); ++k) {
        std::int64_t w = eval_int(e.kids[k], f);
        v = e.op == CExpr::Max ? std::max(v, w) : std::min(v, w);
      }
      return v;
    }
    case CExpr::MyRank: return std::max(proc_.rank(), 0);
    case CExpr::NRanks: return proc_.nranks();
    default: return static_cast<std::int64_t>(eval_real(e, f));
  }
}

std::size_t Interpreter::element(const ArrayValue& a, const std::vector<CExpr>& subs, Frame& f, int slot) {
  std::int64_t idx[2] = {0, 0};
  const std::size_t n = std::min<std::size_t>(subs.size(), 2);
  for (std::size_t k = 0; k < n; ++k) idx[k] = eval_int(subs[k], f);
  auto off = a.offset(idx, n);
  if (!off)
    fault(f, "index " + index_text(idx, n) + " outside bounds " + bounds_text(a.dims) + " of '" +
                 f.routine->vars[slot].name + "'");
  return *off;
}

double Interpreter::eval_real(const CExpr& e, Frame& f) {
  if (e.is_int) return static_cast<double>(eval_int(e, f));
  switch (e.op) {
    case CExpr::RLit: return e.r;
    case CExpr::LoadR: return f.cells[e.slot]->real;
    case CExpr::Elem: {
      const ArrayValue& a = *f.arrays[e.slot];
      return a.data[element(a, e.kids, f, e.slot)];
    }
    case CExpr::Neg: return -eval_real(e.kids[0], f);
    case CExpr::Add: return eval_real(e.kids[0], f) + eval_real(e.kids[1], f);
    case CExpr::Sub: return eval_real(e.kids[0], f) - eval_real(e.kids[1], f);
    case CExpr::Mul: return eval_real(e.kids[0], f) * eval_real(e.kids[1], f);
    case CExpr::Div: {
      double l = eval_real(e.kids[0], f);
      double d = eval_real(e.kids[1], f);
      if (d == 0.0) fault(f, "division by zero");
      return l / d;
    }
    case CExpr::Max:
    case CExpr::Min: {
      double v = eval_real(e.kids[0], f);
      for (std::size_t k = 1; k < e.kids.size(); ++k) {
        double w = eval_real(e.kids[k], f);
        v = e.op == CExpr::Max ? std::max(v, w) : std::min(v, w);
      }
      return v;
    }
    default: return static_cast<double>(eval_int(e, f));
  }
}

Interpreter::Flow Interpreter::exec_block(const std::vector<CStmt>& body, Frame& f) {
  for (const auto& s : body) {
    f.line = s.line;
    proc_.boundary();
    if (exec(s, f) == Flow::Return) return Flow::Return;
  }
  return Flow::Next;
}

Interpreter::Flow Interpreter::exec(const CStmt& s, Frame& f) {
  switch (s.op) {
    case CStmt::AssignI: f.cells[s.slot]->integer = eval_int(s.a, f); break;
    case CStmt::AssignR: f.cells[s.slot]->real = eval_real(s.a, f); break;
    case CStmt::AssignElem: {
      double v = eval_real(s.a, f);
      ArrayValue& a = *f.arrays[s.slot];
      a.data[element(a, s.subs, f, s.slot)] = v;
      if (trace_writes_) trace.insert({f.routine->name, s.id, f.routine->vars[s.slot].name});
      break;
    }
    case CStmt::Do: {
      std::int64_t lo = eval_int(s.a, f);
      std::int64_t hi = eval_int(s.b, f);
      std::int64_t step = s.has_step ? eval_int(s.c, f) : 1;
      if (step == 0) fault(f, "zero loop step");
      std::int64_t trips = (hi - lo + step) / step;
      Cell* idx = f.cells[s.slot];
      std::int64_t v = lo;
      for (std::int64_t k = 0; k < trips; ++k, v += step) {
        idx->integer = v;
        if (exec_block(s.body, f) == Flow::Return) return Flow::Return;
        f.line = s.line;
      }
      idx->integer = v;
      break;
    }
    case CStmt::Call: call(s.callee, s.args, f); break;
    case CStmt::Resident: call_resident(s, f); break;
    case CStmt::Return: return Flow::Return;
    case CStmt::Send:
    case CStmt::Receive: {
      World* w = proc_.world();
      std::int64_t count = eval_int(s.b, f);
      std::int64_t peer = eval_int(s.c, f);
      if (!w || peer < 0 || peer >= proc_.nranks() || count <= 0) break;
      ArrayValue& a = *f.arrays[s.slot];
      std::size_t off = element(a, s.subs, f, s.slot);
      if (off + std::size_t(count) > a.size()) fault(f, "message of " + std::to_string(count) + " elements overruns '" + f.routine->vars[s.slot].name + "'");
      if (s.op == CStmt::Send) {
        w->send(proc_.rank(), int(peer),
                std::vector<double>(a.data.begin() + off, a.data.begin() + off + count));
      } else {
        auto data = w->receive(proc_, int(peer), std::size_t(count), where());
        std::copy(data.begin(), data.end(), a.data.begin() + off);
      }
      break;
    }
    case CStmt::Exchange: exchange(s, f); break;
    case CStmt::SetupPart: {
      std::int64_t lo = eval_int(s.a, f);
      std::int64_t hi = eval_int(s.b, f);
      std::pair<std::int64_t, std::int64_t> b;
      try {
        b = partition::block_bounds(lo, hi, proc_.nranks(), std::max(proc_.rank(), 0));
      } catch (const Error& e) {
        fault(f, e.what());
      }
      f.cells[s.slot]->integer = b.first;
      f.cells[s.slot2]->integer = b.second;
      break;
    }
  }
  return Flow::Next;
}

void Interpreter::exchange(const CStmt& s, Frame& f) {
  World* w = proc_.world();
  if (!w) return;
  const int me = proc_.rank();
  const int n = proc_.nranks();
  const std::int64_t count = eval_int(s.b, f);
  if (count <= 0) return;
  const bool right = s.dir == Direction::Right;
  const int send_to = right ? me - 1 : me + 1;
  const int recv_from = right ? me + 1 : me - 1;
  const int d = s.dim - 1;

  auto span = [&](int slot, const std::vector<CExpr>& subs) {
    ArrayValue& a = *f.arrays[slot];
    std::int64_t idx[2] = {0, 0};
    const std::size_t nd = std::min<std::size_t>(subs.size(), 2);
    for (std::size_t k = 0; k < nd; ++k) idx[k] = eval_int(subs[k], f);
    auto first = a.offset(idx, nd);
    idx[d] += count - 1;
    auto last = a.offset(idx, nd);
    idx[d] -= count - 1;
    if (!first || !last)
      fault(f, "exchange of " + std::to_string(count) + " elements from " + index_text(idx, nd) +
                   " leaves bounds " + bounds_text(a.dims) + " of '" + f.routine->vars[slot].name + "'");
    std::size_t stride = 1;
    for (int k = 0; k < d; ++k) stride *= std::size_t(a.dims[k].size());
    return std::make_tuple(&a, *first, stride);
  };

  if (send_to >= 0 && send_to < n) {
    auto [a, off, stride] = span(s.slot2, s.subs2);
    std::vector<double> data(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) data[k] = a->data[off + std::size_t(k) * stride];
    w->send(me, send_to, std::move(data));
  }
  if (recv_from >= 0 && recv_from < n) {
    auto [a, off, stride] = span(s.slot, s.subs);
    auto data = w->receive(proc_, recv_from, std::size_t(count), where());
    for (std::int64_t k = 0; k < count; ++k) a->data[off + std::size_t(k) * stride] = data[k];
  }
}

void Interpreter::call(int callee, const std::vector<CArg>& args, Frame& caller) {
  // The language has no recursion, but a routine patched into its own entry recurses.
  constexpr int kMaxDepth = 256;
  if (depth_ >= kMaxDepth) fault(caller, "call depth exceeds " + std::to_string(kMaxDepth));
  struct Depth {
    int& d;
    explicit Depth(int& x) : d(++x) {}
    ~Depth() { --d; }
  } depth(depth_);
  const CRoutine& r = routines_[callee];
  const std::size_t n = r.vars.size();
  Frame f;
  f.routine = &r;
  f.index = callee;
  f.own.resize(n);
  f.cells.assign(n, nullptr);
  f.arrays.assign(n, nullptr);
  f.keep.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const VarInfo& info = r.vars[v];
    if (info.formal > 0) {
      const CArg& a = args[info.formal - 1];
      if (a.kind == CArg::Array) {
        f.keep[v] = caller.keep[a.slot];
        f.arrays[v] = caller.arrays[a.slot];
        continue;
      }
      if (a.kind == CArg::Ref && caller.routine->vars[a.slot].kind == info.kind) {
        f.cells[v] = caller.cells[a.slot];
        continue;
      }
      if (a.kind == CArg::Ref) {
        const Cell& src = *caller.cells[a.slot];
        if (info.kind == VarInfo::Int)
          f.own[v].integer = caller.routine->vars[a.slot].kind == VarInfo::Int ? src.integer
                                                                               : std::int64_t(src.real);
        else
          f.own[v].real = caller.routine->vars[a.slot].kind == VarInfo::Int ? double(src.integer) : src.real;
      } else if (info.kind == VarInfo::Int) {
        f.own[v].integer = eval_int(a.value, caller);
      } else {
        f.own[v].real = eval_real(a.value, caller);
      }
      f.cells[v] = &f.own[v];
    } else if (info.kind == VarInfo::Array) {
      f.keep[v] = std::make_shared<ArrayValue>(info.dims);
      f.arrays[v] = f.keep[v].get();
    } else {
      f.cells[v] = &f.own[v];
    }
  }
  f.invocation = ++invocations_[callee];
  f.line = caller.line;

  StackGuard guard(stack_, &f);
  run_points(f, Site::Entry);
  proc_.trap(r.name, Site::Entry, f.invocation, "");
  exec_block(r.body, f);
  run_points(f, Site::Exit);
  proc_.trap(r.name, Site::Exit, f.invocation, "");

  LastFrame& last = last_[callee];
  last.arrays.clear();
  last.scalars.clear();
  for (std::size_t v = 0; v < n; ++v) {
    const VarInfo& info = r.vars[v];
    if (info.kind == VarInfo::Array)
      last.arrays[info.name] = f.keep[v];
    else
      last.scalars[info.name] = info.kind == VarInfo::Int ? double(f.cells[v]->integer) : f.cells[v]->real;
  }
}

void Interpreter::run_points(Frame& f, Site site) {
  auto snap = std::atomic_load(&proc_.points_snapshot_);
  if (!snap) return;
  for (const auto& pt : *snap) {
    if (pt.site != site || pt.routine != f.routine->name) continue;
    for (const auto& c : pt.calls) {
      auto user = index_of_.find(c.fn);
      if (user != index_of_.end()) {
        // A routine of the program itself, bound to the caller's formals by reference.
        std::vector<CArg> args;
        for (int pos : c.argpos) {
          int slot = f.routine->formal_slots.at(pos - 1);
          CArg a;
          a.kind = f.routine->vars[slot].kind == VarInfo::Array ? CArg::Array : CArg::Ref;
          a.slot = slot;
          args.push_back(std::move(a));
        }
        call(user->second, args, f);
        continue;
      }
      ResidentFn fn = find_resident(c.fn);
      if (!fn) fault(f, "no resident routine '" + c.fn + "'");
      std::vector<ResidentArg> args;
      for (int pos : c.argpos) {
        int slot = f.routine->formal_slots.at(pos - 1);
        const VarInfo& info = f.routine->vars[slot];
        args.push_back({info.name, f.arrays[slot], f.cells[slot], info.kind == VarInfo::Int});
      }
      ResidentCall rc{proc_, f.routine->name, site, f.invocation, std::move(args), c.meta};
      fn(rc);
    }
  }
}

void Interpreter::call_resident(const CStmt& s, Frame& f) {
  ResidentFn fn = find_resident(s.name);
  if (!fn) fault(f, "no resident routine '" + s.name + "'");
  std::vector<Cell> temps(s.args.size());
  std::vector<ResidentArg> args;
  for (std::size_t k = 0; k < s.args.size(); ++k) {
    const CArg& a = s.args[k];
    ResidentArg ra;
    if (a.kind == CArg::Array) {
      ra.name = f.routine->vars[a.slot].name;
      ra.array = f.arrays[a.slot];
    } else if (a.kind == CArg::Ref) {
      ra.name = f.routine->vars[a.slot].name;
      ra.cell = f.cells[a.slot];
      ra.integer = f.routine->vars[a.slot].kind == VarInfo::Int;
    } else {
      ra.integer = a.value.is_int;
      if (ra.integer)
        temps[k].integer = eval_int(a.value, f);
      else
        temps[k].real = eval_real(a.value, f);
      ra.cell = &temps[k];
    }
    args.push_back(std::move(ra));
  }
  static const std::map<std::string, std::string> no_meta;
  ResidentCall rc{proc_, f.routine->name, Site::Exit, f.invocation, std::move(args), no_meta};
  fn(rc);
}

void Interpreter::run_main() {
  Frame root;
  static const CRoutine outer{"<launcher>", {}, {}, {}, {}};
  root.routine = &outer;
  call(main_, {}, root);
}

std::string Interpreter::where() const {
  if (stack_.empty()) return "<none>";
  return stack_.back()->routine->name + ":" + std::to_string(stack_.back()->line);
}

bool Interpreter::read(const std::string& routine, const std::string& var, MemValue& out) const {
  auto it = index_of_.find(routine);
  if (it == index_of_.end()) return false;
  const CRoutine& r = routines_[it->second];
  auto st = r.slot_of.find(var);
  if (st == r.slot_of.end()) return false;
  const VarInfo& info = r.vars[st->second];
  out.is_array = info.kind == VarInfo::Array;
  out.type = info.kind == VarInfo::Int ? ScalarType::Integer : ScalarType::Real;
  for (auto f = stack_.rbegin(); f != stack_.rend(); ++f) {
    if ((*f)->index != it->second) continue;
    if (out.is_array)
      out.array = *(*f)->arrays[st->second];
    else
      out.scalar = info.kind == VarInfo::Int ? double((*f)->cells[st->second]->integer)
                                              : (*f)->cells[st->second]->real;
    return true;
  }
  auto lf = last_.find(it->second);
  if (lf == last_.end()) return false;
  if (out.is_array) {
    out.array = *lf->second.arrays.at(var);
  } else {
    out.scalar = lf->second.scalars.at(var);
  }
  return true;
}

bool Interpreter::write(const std::string& routine, const std::string& var, const MemValue& v) {
  auto it = index_of_.find(routine);
  if (it == index_of_.end()) return false;
  const CRoutine& r = routines_[it->second];
  auto st = r.slot_of.find(var);
  if (st == r.slot_of.end()) return false;
  const VarInfo& info = r.vars[st->second];
  if ((info.kind == VarInfo::Array) != v.is_array || (v.is_array && v.array.dims != info.dims))
    throw Error("ShapeMismatch", "value does not match the declaration of '" + var + "'");
  ArrayValue* array = nullptr;
  Cell* cell = nullptr;
  for (auto f = stack_.rbegin(); f != stack_.rend() && !array && !cell; ++f) {
    if ((*f)->index != it->second) continue;
    array = (*f)->arrays[st->second];
    cell = (*f)->cells[st->second];
  }
  if (!array && !cell) {
    auto lf = last_.find(it->second);
    if (lf == last_.end()) return false;
    if (v.is_array)
      *lf->second.arrays.at(var) = v.array;
    else
      lf->second.scalars[var] = v.scalar;
    return true;
  }
  if (v.is_array)
    *array = v.array;
  else if (info.kind == VarInfo::Int)
    cell->integer = std::int64_t(v.scalar);
  else
    cell->real = v.scalar;
  return true;
}

FinalState Interpreter::final_state() const {
  FinalState fs;
  for (const auto& [idx, lf] : last_) {
    const std::string& name = routines_[idx].name;
    for (const auto& [var, arr] : lf.arrays) fs.arrays[name][var] = *arr;
    for (const auto& [var, val] : lf.scalars) fs.scalars[name][var] = val;
  }
  return fs;
}

}  // namespace relcheck::runtime
