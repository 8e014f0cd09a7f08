#include "relcheck/partition/partition.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "relcheck/lang/typecheck.hpp"

namespace relcheck::partition {

using namespace relcheck::lang;
using depan::DefUseDB;
using depan::DependenceEdge;
using depan::VarKey;

namespace {

std::optional<Affine> affine_in(const RoutineScope& scope, const Expr& e) {
  auto lookup = [&](const std::string& n) -> std::optional<std::int64_t> {
    const Symbol* s = scope.find(n);
    if (s && s->kind == Symbol::Kind::Constant) return s->value;
    return std::nullopt;
  };
  return affine_of(e, lookup);
}

void array_refs(const Expr& e, std::vector<const ArrayRef*>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayRef>) {
          out.push_back(&n);
          for (const auto& s : n.subscripts) array_refs(s, out);
        } else if constexpr (std::is_same_v<T, Unary>) {
          array_refs(*n.operand, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          array_refs(*n.lhs, out);
          array_refs(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
          for (const auto& a : n.args) array_refs(a, out);
        }
      },
      e.node);
}

std::string extent_text(const Extent& e) {
  return std::to_string(e.lo) + ":" + std::to_string(e.hi);
}

// Two array dimensions indexed by the same loop index, either within one
// assignment or as targets written in the same loop.
struct CoOccurrence {
  VarKey a;
  int dim_a;
  VarKey b;
  int dim_b;
};

std::vector<CoOccurrence> co_occurrences(const Program& p, const SymbolTable& st) {
  std::vector<CoOccurrence> out;
  for (const auto& r : p.routines) {
    const RoutineScope& scope = st.scope(r.name);
    std::vector<std::string> active;
    std::vector<int> active_ids;
    // Targets written in one loop at the same index position also share a
    // partition: (loop id, index) -> (array, dim).
    std::map<std::pair<int, std::string>, std::vector<std::pair<VarKey, int>>> writes;
    std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
      for (const auto& s : body) {
        if (const auto* loop = std::get_if<DoLoop>(&s.node)) {
          active.push_back(loop->index);
          active_ids.push_back(s.id);
          walk(loop->body);
          active.pop_back();
          active_ids.pop_back();
          continue;
        }
        const auto* as = std::get_if<Assign>(&s.node);
        if (!as) continue;
        const auto* t = std::get_if<ArrayRef>(&as->target.node);
        if (!t) continue;
        for (std::size_t k = 0; k < t->subscripts.size(); ++k) {
          auto a = affine_in(scope, t->subscripts[k]);
          if (!a || a->var.empty()) continue;
          for (std::size_t l = active.size(); l-- > 0;) {
            if (active[l] != a->var) continue;
            writes[{active_ids[l], a->var}].push_back({{r.name, t->name}, int(k) + 1});
            break;
          }
        }
        std::vector<const ArrayRef*> reads;
        array_refs(as->value, reads);
        for (const ArrayRef* src : reads) {
          for (std::size_t k = 0; k < t->subscripts.size(); ++k) {
            auto a = affine_in(scope, t->subscripts[k]);
            if (!a || a->var.empty()) continue;
            if (std::find(active.begin(), active.end(), a->var) == active.end()) continue;
            for (std::size_t k2 = 0; k2 < src->subscripts.size(); ++k2) {
              auto b = affine_in(scope, src->subscripts[k2]);
              if (b && b->var == a->var)
                out.push_back({{r.name, t->name}, int(k) + 1, {r.name, src->name}, int(k2) + 1});
            }
          }
        }
      }
    };
    walk(r.body);
    for (const auto& [loop, ts] : writes)
      for (std::size_t i = 1; i < ts.size(); ++i)
        out.push_back({ts[0].first, ts[0].second, ts[i].first, ts[i].second});
  }
  return out;
}

std::vector<VarKey> storage_class(const DefUseDB& db, const VarKey& k) {
  auto it = db.class_of.find(k);
  if (it == db.class_of.end()) return {k};
  return db.classes[it->second];
}

// Per-routine loop structure.
struct Facts {
  std::map<int, const DoLoop*> loops;
  std::map<int, std::vector<int>> chain;  // stmt id -> enclosing loops, outermost first
  std::map<int, const Stmt*> stmts;
};

Facts gather(const Routine& r) {
  Facts f;
  std::vector<int> stack;
  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      f.chain[s.id] = stack;
      f.stmts[s.id] = &s;
      if (const auto* loop = std::get_if<DoLoop>(&s.node)) {
        f.loops[s.id] = loop;
        stack.push_back(s.id);
        walk(loop->body);
        stack.pop_back();
      }
    }
  };
  walk(r.body);
  return f;
}

// How an exchange addresses the non-distributed dimension.
struct OtherDim {
  enum Kind { None, Const, Direct, Loop } kind = None;
  std::string var;
  std::int64_t offset = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  auto key() const { return std::tie(kind, var, offset, lo, hi); }
};

struct ExchangeNeed {
  int at = -1;  // loop statement the exchange precedes
  std::string array;
  Direction dir = Direction::Left;
  OtherDim other;
  std::int64_t count = 0;
};

Stmt make_stmt(Stmt::Node node) {
  Stmt s;
  s.node = std::move(node);
  return s;
}

VarDecl int_decl(const std::string& name) {
  VarDecl d;
  d.name = name;
  d.type = ScalarType::Integer;
  return d;
}

struct RoutinePlan {
  Facts facts;
  std::map<int, std::int64_t> owner_offset;  // distributed loop -> owner offset
  std::vector<ExchangeNeed> exchanges;
  bool needs_bounds = false;
  std::string lower_name;
  std::string upper_name;
};

}  // namespace

DistributionSpec make_distribution(const Program& p, const std::string& array,
                                   const std::string& routine, int dim, int nranks) {
  SymbolTable st = typecheck(p);
  const Routine* r = p.find(routine);
  const VarDecl* decl = r ? r->find_decl(array) : nullptr;
  if (!decl || !decl->is_array())
    throw Error("UnknownArray", "no array '" + array + "' in routine '" + routine + "'");
  if (dim < 1 || dim > int(decl->dims.size()))
    throw Error("InvalidDimension", "array '" + array + "' has no dimension " + std::to_string(dim));
  const Extent ext = decl->dims[dim - 1];
  if (nranks < 1 || nranks > ext.size())
    throw Error("InvalidRank", std::to_string(nranks) + " ranks cannot split " +
                                   std::to_string(ext.size()) + " elements");

  DefUseDB db = depan::build_defuse(p);
  const VarKey seed{routine, array};
  std::map<VarKey, int> group;

  auto join = [&](const VarKey& k, int d) -> bool {
    auto it = group.find(k);
    if (it != group.end()) {
      if (it->second != d)
        throw Error("AlignmentMismatch", "array '" + k.second + "' in '" + k.first +
                                             "' is aligned along dimensions " +
                                             std::to_string(it->second) + " and " + std::to_string(d));
      return false;
    }
    if (k != seed && db.may_define(k.first, k.second).empty()) return false;  // replicated
    for (const auto& m : storage_class(db, k)) {
      auto jt = group.find(m);
      if (jt != group.end() && jt->second != d)
        throw Error("AlignmentMismatch", "array '" + m.second + "' in '" + m.first +
                                             "' is aligned along two dimensions");
      group[m] = d;
    }
    return true;
  };

  join(seed, dim);
  auto pairs = co_occurrences(p, st);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : pairs) {
      auto ia = group.find(c.a);
      if (ia != group.end() && ia->second == c.dim_a) changed |= join(c.b, c.dim_b);
      auto ib = group.find(c.b);
      if (ib != group.end() && ib->second == c.dim_b) changed |= join(c.a, c.dim_a);
    }
  }

  DistributionSpec spec;
  spec.array = array;
  spec.routine = routine;
  spec.dim = dim;
  spec.lo = ext.lo;
  spec.hi = ext.hi;
  spec.nranks = nranks;
  for (const auto& [k, d] : group) {
    const VarDecl* md = p.find(k.first)->find_decl(k.second);
    if (d != dim)
      throw Error("AlignmentMismatch", "array '" + k.second + "' in '" + k.first +
                                           "' would be distributed along dimension " +
                                           std::to_string(d) + ", not " + std::to_string(dim));
    if (!md || int(md->dims.size()) < d || !(md->dims[d - 1] == ext))
      throw Error("AlignmentMismatch",
                  "array '" + k.second + "' in '" + k.first + "' has extent " +
                      (md && int(md->dims.size()) >= d ? extent_text(md->dims[d - 1]) : "?") +
                      " along dimension " + std::to_string(d) + ", expected " + extent_text(ext));
    spec.alignment.push_back({k.first, k.second});
  }
  std::sort(spec.alignment.begin(), spec.alignment.end());
  return spec;
}

ParallelizeResult parallelize(const Program& p, const DistributionSpec& requested,
                              const DefUseDB& db, const std::vector<int>& removed_ids) {
  std::set<int> removed;
  for (int id : removed_ids) {
    if (!db.edge(id)) throw Error("UnknownEdgeId", "no dependence edge #" + std::to_string(id));
    removed.insert(id);
  }
  const DistributionSpec dist =
      make_distribution(p, requested.array, requested.routine, requested.dim, requested.nranks);
  SymbolTable st = typecheck(p);
  const int D = dist.dim;
  const std::int64_t min_block = (dist.hi - dist.lo + 1) / dist.nranks;

  auto distributed = [&](const std::string& routine, const std::string& array) {
    return dist.covers(routine, array);
  };

  std::map<std::string, RoutinePlan> plans;
  for (const auto& r : p.routines) {
    RoutinePlan& plan = plans[r.name];
    plan.facts = gather(r);
    const Facts& f = plan.facts;
    const RoutineScope& scope = st.scope(r.name);
    auto innermost = [&](int stmt) { return f.chain.at(stmt).empty() ? -1 : f.chain.at(stmt).back(); };
    auto loop_text = [&](int loop) {
      return "loop s" + std::to_string(loop) + " (do " + f.loops.at(loop)->index + ") in routine " + r.name;
    };

    // Owner-computes: each write to a distributed array selects the loop
    // running over its distributed subscript.
    for (const auto& [id, s] : f.stmts) {
      const auto* as = std::get_if<Assign>(&s->node);
      const auto* t = as ? std::get_if<ArrayRef>(&as->target.node) : nullptr;
      if (!t || !distributed(r.name, t->name)) continue;
      auto a = affine_in(scope, t->subscripts[D - 1]);
      int owner = -1;
      if (a && !a->var.empty())
        for (int l : f.chain.at(id))
          if (f.loops.at(l)->index == a->var) owner = l;
      if (owner < 0)
        throw NotParallelizable(r.name, innermost(id), -1, "ReplicatedWrite",
                                "write to distributed array '" + t->name + "' at s" +
                                    std::to_string(id) + " in routine " + r.name +
                                    " is not indexed by a loop over the distributed dimension");
      auto [it, fresh] = plan.owner_offset.emplace(owner, a->offset);
      if (!fresh && it->second != a->offset)
        throw NotParallelizable(r.name, owner, -1, "MixedOwnerOffset",
                                loop_text(owner) + " writes distributed arrays at different offsets");
    }
    for (const auto& [l, c] : plan.owner_offset) {
      for (int outer : f.chain.at(l))
        if (plan.owner_offset.count(outer))
          throw NotParallelizable(r.name, l, -1, "NestedDistribution",
                                  loop_text(l) + " is nested in distributed " + loop_text(outer));
      const DoLoop* loop = f.loops.at(l);
      if (loop->step) {
        auto s = affine_in(scope, *loop->step);
        if (!s || !s->var.empty() || s->offset != 1)
          throw NotParallelizable(r.name, l, -1, "NonUnitStep", loop_text(l) + " has a non-unit step");
      }
    }
    for (const auto& [id, s] : f.stmts) {
      const auto* as = std::get_if<Assign>(&s->node);
      const auto* t = as ? std::get_if<ArrayRef>(&as->target.node) : nullptr;
      if (!t || distributed(r.name, t->name)) continue;
      for (int l : f.chain.at(id))
        if (plan.owner_offset.count(l))
          throw NotParallelizable(r.name, l, -1, "ReplicatedWrite",
                                  loop_text(l) + " writes replicated array '" + t->name + "'");
    }

    for (const auto& e : db.edges) {
      if (e.kind != depan::DepKind::Flow || !e.loop_carried || removed.count(e.id)) continue;
      if (e.source.routine != r.name || !plan.owner_offset.count(e.carrier)) continue;
      throw NotParallelizable(r.name, e.carrier, e.id, "CarriedFlow",
                              loop_text(e.carrier) + " is not parallelizable: " + depan::describe_edge(e));
    }

    for (const auto& [id, s] : f.stmts) {
      if (std::holds_alternative<DoLoop>(s->node)) continue;
      int dl = -1;
      for (int l : f.chain.at(id))
        if (plan.owner_offset.count(l)) dl = l;
      if (const auto* call = std::get_if<CallStmt>(&s->node)) {
        if (dl >= 0 && !is_resident_name(call->callee))
          throw NotParallelizable(r.name, dl, -1, "CallInLoop",
                                  loop_text(dl) + " calls '" + call->callee + "'");
        continue;
      }
      const auto* as = std::get_if<Assign>(&s->node);
      if (!as) continue;
      std::vector<const ArrayRef*> refs;
      array_refs(as->value, refs);
      if (const auto* t = std::get_if<ArrayRef>(&as->target.node))
        for (const auto& sub : t->subscripts) array_refs(sub, refs);
      for (const ArrayRef* ref : refs) {
        if (!distributed(r.name, ref->name)) continue;
        auto a = affine_in(scope, ref->subscripts[D - 1]);
        if (dl < 0 || !a || a->var != f.loops.at(dl)->index)
          throw NotParallelizable(r.name, dl >= 0 ? dl : innermost(id), -1, "NonLocalRead",
                                  "read of distributed array '" + ref->name + "' at s" +
                                      std::to_string(id) + " in routine " + r.name +
                                      " is not aligned with a distributed loop");
      }
    }

    // Halo exchanges for surviving flow edges into shifted reads.
    for (const auto& e : db.edges) {
      if (e.kind != depan::DepKind::Flow || removed.count(e.id)) continue;
      if (e.sink.routine != r.name || e.sink.subscripts.empty() || !distributed(r.name, e.sink.var))
        continue;
      const auto& chain = f.chain.at(e.sink.stmt);
      int dl = -1;
      for (int l : chain)
        if (plan.owner_offset.count(l)) dl = l;
      if (dl < 0) continue;
      const auto& a = e.sink.subscripts[D - 1];
      if (!a) continue;
      std::int64_t shift = a->offset - plan.owner_offset.at(dl);
      if (shift == 0) continue;

      std::vector<int> src_chain;
      if (e.source.routine == r.name) src_chain = f.chain.at(e.source.stmt);
      int pick = -1;
      for (std::size_t k = 0; k < chain.size(); ++k) {
        if (std::find(src_chain.begin(), src_chain.end(), chain[k]) != src_chain.end()) continue;
        const std::string& idx = f.loops.at(chain[k])->index;
        bool used = false;
        for (const auto& sub : e.sink.subscripts) used |= sub && sub->var == idx;
        if (used) {
          pick = int(k);
          break;
        }
      }
      if (pick < 0) continue;

      ExchangeNeed need;
      need.at = chain[pick];
      need.array = e.sink.var;
      need.dir = shift > 0 ? Direction::Right : Direction::Left;
      need.count = shift > 0 ? shift : -shift;
      if (e.sink.subscripts.size() == 2) {
        const int o = D == 1 ? 1 : 0;
        const auto& b = e.sink.subscripts[o];
        if (!b) continue;
        need.other.offset = b->offset;
        if (b->var.empty()) {
          need.other.kind = OtherDim::Const;
        } else {
          int inner = -1;
          for (std::size_t k = pick; k < chain.size(); ++k)
            if (f.loops.at(chain[k])->index == b->var) inner = chain[k];
          if (inner < 0) {
            need.other.kind = OtherDim::Direct;
            need.other.var = b->var;
          } else {
            need.other.kind = OtherDim::Loop;
            need.other.var = b->var;
            need.other.offset = 0;
            const Extent ext = r.find_decl(e.sink.var)->dims[o];
            const DoLoop* m = f.loops.at(inner);
            auto lo = affine_in(scope, m->lower);
            auto hi = affine_in(scope, m->upper);
            if (lo && hi && lo->var.empty() && hi->var.empty()) {
              need.other.lo = std::max(ext.lo, lo->offset + b->offset);
              need.other.hi = std::min(ext.hi, hi->offset + b->offset);
            } else {
              need.other.lo = ext.lo;
              need.other.hi = ext.hi;
            }
          }
        }
      }
      if (need.count > min_block)
        throw Error("HaloExceedsBlock", "halo of " + std::to_string(need.count) + " for '" +
                                            need.array + "' exceeds the smallest block (" +
                                            std::to_string(min_block) + " elements)");
      bool merged = false;
      for (auto& x : plan.exchanges) {
        if (x.at == need.at && x.array == need.array && x.dir == need.dir &&
            x.other.key() == need.other.key()) {
          x.count = std::max(x.count, need.count);
          merged = true;
        }
      }
      if (!merged) plan.exchanges.push_back(need);
    }
    std::stable_sort(plan.exchanges.begin(), plan.exchanges.end(),
                     [](const ExchangeNeed& x, const ExchangeNeed& y) {
                       return std::make_pair(x.at, x.dir == Direction::Right ? 0 : 1) <
                              std::make_pair(y.at, y.dir == Direction::Right ? 0 : 1);
                     });
    plan.needs_bounds = !plan.owner_offset.empty() || !plan.exchanges.empty();
  }

  // Bounds travel down every call chain that reaches distributed work.
  const Routine& main = p.main();
  plans[main.name].needs_bounds = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : p.routines) {
      if (plans[r.name].needs_bounds) continue;
      for_each_stmt(r.body, [&](const Stmt& s) {
        const auto* call = std::get_if<CallStmt>(&s.node);
        if (call && !is_resident_name(call->callee) && plans[call->callee].needs_bounds &&
            !plans[r.name].needs_bounds) {
          plans[r.name].needs_bounds = true;
          changed = true;
        }
      });
    }
  }
  for (const auto& r : p.routines) {
    RoutinePlan& plan = plans[r.name];
    if (!plan.needs_bounds) continue;
    if (r.is_program) {
      std::string x;
      if (dist.routine == r.name) {
        x = dist.array;
      } else {
        for (const auto& d : r.decls)
          if (distributed(r.name, d.name)) {
            x = d.name;
            break;
          }
      }
      plan.lower_name = "cap_bl" + x;
      plan.upper_name = "cap_bh" + x;
    } else {
      std::string x = r.name;
      for (const auto& prm : r.params)
        if (distributed(r.name, prm)) {
          x = prm;
          break;
        }
      plan.lower_name = "cap_l" + x;
      plan.upper_name = "cap_h" + x;
    }
    for (const auto& n : {plan.lower_name, plan.upper_name})
      if (r.find_decl(n) || r.find_constant(n))
        throw Error("NameClash", "routine '" + r.name + "' already declares '" + n + "'");
  }

  Program out = p;
  out.form = Form::Spmd;
  for (auto& r : out.routines) {
    const RoutinePlan& plan = plans[r.name];
    if (!plan.needs_bounds) continue;
    const std::string& L = plan.lower_name;
    const std::string& H = plan.upper_name;
    std::set<std::string> loop_vars;

    auto exchange_stmt = [&](const ExchangeNeed& x) -> Stmt {
      Expr recv_d = x.dir == Direction::Right ? offset_expr(name_ref(H), 1) : offset_expr(name_ref(L), -x.count);
      Expr send_d = x.dir == Direction::Right ? name_ref(L) : offset_expr(name_ref(H), -(x.count - 1));
      std::optional<Expr> other;
      switch (x.other.kind) {
        case OtherDim::None: break;
        case OtherDim::Const: other = int_lit(x.other.offset); break;
        case OtherDim::Direct: other = offset_expr(name_ref(x.other.var), x.other.offset); break;
        case OtherDim::Loop: other = name_ref("cap_" + x.other.var); break;
      }
      auto ref = [&](Expr d) {
        std::vector<Expr> subs;
        if (!other) {
          subs.push_back(std::move(d));
        } else if (D == 1) {
          subs.push_back(std::move(d));
          subs.push_back(*other);
        } else {
          subs.push_back(*other);
          subs.push_back(std::move(d));
        }
        return array_ref(x.array, std::move(subs));
      };
      Exchange ex;
      ex.recv = ref(std::move(recv_d));
      ex.send = ref(std::move(send_d));
      ex.count = int_lit(x.count);
      ex.dir = x.dir;
      ex.dim = D;
      Stmt s = make_stmt(std::move(ex));
      if (x.other.kind != OtherDim::Loop) return s;
      DoLoop loop;
      loop.index = "cap_" + x.other.var;
      loop.lower = int_lit(x.other.lo);
      loop.upper = int_lit(x.other.hi);
      loop.body.push_back(std::move(s));
      loop_vars.insert(loop.index);
      return make_stmt(std::move(loop));
    };

    std::function<std::vector<Stmt>(const std::vector<Stmt>&)> rewrite =
        [&](const std::vector<Stmt>& body) {
          std::vector<Stmt> res;
          for (const auto& s : body) {
            for (const auto& x : plan.exchanges)
              if (x.at == s.id) res.push_back(exchange_stmt(x));
            Stmt c = s;
            if (auto* loop = std::get_if<DoLoop>(&c.node)) {
              auto it = plan.owner_offset.find(s.id);
              if (it != plan.owner_offset.end()) {
                loop->lower = intrinsic(Intrinsic::Max, {loop->lower, offset_expr(name_ref(L), -it->second)});
                loop->upper = intrinsic(Intrinsic::Min, {loop->upper, offset_expr(name_ref(H), -it->second)});
              }
              loop->body = rewrite(loop->body);
            } else if (auto* call = std::get_if<CallStmt>(&c.node)) {
              auto pt = plans.find(call->callee);
              if (!is_resident_name(call->callee) && pt != plans.end() && pt->second.needs_bounds) {
                call->args.push_back(name_ref(L));
                call->args.push_back(name_ref(H));
              }
            }
            res.push_back(std::move(c));
          }
          return res;
        };
    r.body = rewrite(r.body);

    if (r.is_program) {
      SetupPart sp;
      sp.lo = int_lit(dist.lo);
      sp.hi = int_lit(dist.hi);
      sp.lower_var = L;
      sp.upper_var = H;
      r.body.insert(r.body.begin(), make_stmt(std::move(sp)));
    } else {
      r.params.push_back(L);
      r.params.push_back(H);
    }
    r.decls.push_back(int_decl(L));
    r.decls.push_back(int_decl(H));
    for (const auto& v : loop_vars)
      if (!r.find_decl(v)) r.decls.push_back(int_decl(v));
  }
  number_statements(out);
  typecheck(out);

  ParallelizeResult result{std::move(out), {}};
  result.db.distributions.push_back(dist);
  result.db.targets = target_records(p, db);
  result.db.removed_edges.assign(removed.begin(), removed.end());
  result.db.bindings = call_bindings(p);
  return result;
}

std::vector<TargetRecord> target_records(const Program& p, const DefUseDB& db) {
  std::vector<TargetRecord> out;
  for (const auto& r : p.routines)
    for (const auto& d : r.decls)
      if (d.is_array()) out.push_back({d.name, r.name, depan::modifying_routines(db, d.name, r.name)});
  return out;
}

std::vector<Binding> call_bindings(const Program& p) {
  std::vector<Binding> out;
  for (const auto& r : p.routines) {
    for_each_stmt(r.body, [&](const Stmt& s) {
      const auto* call = std::get_if<CallStmt>(&s.node);
      if (!call || is_resident_name(call->callee)) return;
      const Routine* callee = p.find(call->callee);
      if (!callee) return;
      for (std::size_t k = 0; k < call->args.size() && k < callee->params.size(); ++k) {
        const auto* n = std::get_if<NameRef>(&call->args[k].node);
        const VarDecl* d = n ? r.find_decl(n->name) : nullptr;
        if (d && d->is_array())
          out.push_back({r.name, callee->name, int(k) + 1, n->name, callee->params[k]});
      }
    });
  }
  return out;
}

}  // namespace relcheck::partition
