#include "relcheck/depan/depan.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "relcheck/error.hpp"
#include "relcheck/lang/typecheck.hpp"

namespace relcheck::depan {

using namespace relcheck::lang;

const char* to_string(DepKind k) {
  switch (k) {
    case DepKind::Flow: return "flow";
    case DepKind::Anti: return "anti";
    case DepKind::Output: return "output";
  }
  return "?";
}

namespace {

struct LoopCtx {
  int stmt;
  std::string index;
};

struct Access {
  AccessSite site;
  std::vector<LoopCtx> loops;
  int order = 0;
  bool is_array = false;
};

class Collector {
 public:
  Collector(const Routine& r, const RoutineScope& scope, std::vector<Access>& out, int& order)
      : routine_(r), scope_(scope), out_(out), order_(order) {}

  void run() { walk(routine_.body); }

 private:
  const Routine& routine_;
  const RoutineScope& scope_;
  std::vector<Access>& out_;
  int& order_;
  std::vector<LoopCtx> loops_;
  int stmt_ = -1;
  int ref_ = 0;

  std::optional<Affine> affine(const Expr& e) const {
    auto lookup = [&](const std::string& n) -> std::optional<std::int64_t> {
      const Symbol* s = scope_.find(n);
      if (s && s->kind == Symbol::Kind::Constant) return s->value;
      return std::nullopt;
    };
    return affine_of(e, lookup);
  }

  bool is_active_index(const std::string& n) const {
    for (const auto& l : loops_)
      if (l.index == n) return true;
    return false;
  }

  void record(const std::string& var, bool write, bool is_array,
              std::vector<std::optional<Affine>> subs) {
    Access a;
    a.site.routine = routine_.name;
    a.site.stmt = stmt_;
    a.site.ref = ref_++;
    a.site.var = var;
    a.site.write = write;
    a.site.subscripts = std::move(subs);
    a.loops = loops_;
    a.order = order_++;
    a.is_array = is_array;
    out_.push_back(std::move(a));
  }

  void reads(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NameRef>) {
            const Symbol* s = scope_.find(n.name);
            if (s && s->kind != Symbol::Kind::Constant && !s->is_array() && !is_active_index(n.name))
              record(n.name, false, false, {});
          } else if constexpr (std::is_same_v<T, ArrayRef>) {
            for (const auto& sub : n.subscripts) reads(sub);
            std::vector<std::optional<Affine>> subs;
            for (const auto& sub : n.subscripts) subs.push_back(affine(sub));
            record(n.name, false, true, std::move(subs));
          } else if constexpr (std::is_same_v<T, Unary>) {
            reads(*n.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            reads(*n.lhs);
            reads(*n.rhs);
          } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
            for (const auto& a : n.args) reads(a);
          }
        },
        e.node);
  }

  void walk(const std::vector<Stmt>& body) {
    for (const auto& st : body) {
      stmt_ = st.id;
      ref_ = 0;
      if (const auto* as = std::get_if<Assign>(&st.node)) {
        reads(as->value);
        if (const auto* t = std::get_if<ArrayRef>(&as->target.node)) {
          for (const auto& sub : t->subscripts) reads(sub);
          std::vector<std::optional<Affine>> subs;
          for (const auto& sub : t->subscripts) subs.push_back(affine(sub));
          record(t->name, true, true, std::move(subs));
        } else {
          const auto& name = std::get<NameRef>(as->target.node).name;
          record(name, true, false, {});
        }
      } else if (const auto* loop = std::get_if<DoLoop>(&st.node)) {
        reads(loop->lower);
        reads(loop->upper);
        if (loop->step) reads(*loop->step);
        loops_.push_back({st.id, loop->index});
        walk(loop->body);
        loops_.pop_back();
      } else if (const auto* call = std::get_if<CallStmt>(&st.node)) {
        for (const auto& a : call->args)
          if (!std::holds_alternative<NameRef>(a.node)) reads(a);
      }
    }
  }
};

struct Level {
  bool any = true;
  std::int64_t d = 0;
};

class EdgeBuilder {
 public:
  explicit EdgeBuilder(std::vector<DependenceEdge>& edges) : edges_(edges) {}

  void emit(const Access& src, const Access& snk, bool carried, int carrier,
            std::optional<std::int64_t> distance, bool interprocedural) {
    DependenceEdge e;
    e.id = static_cast<int>(edges_.size());
    if (src.site.write && !snk.site.write)
      e.kind = DepKind::Flow;
    else if (!src.site.write && snk.site.write)
      e.kind = DepKind::Anti;
    else
      e.kind = DepKind::Output;
    e.source = src.site;
    e.sink = snk.site;
    e.loop_carried = carried;
    e.carrier = carrier;
    e.distance = distance;
    e.interprocedural = interprocedural;
    const auto& a = src.site.subscripts;
    const auto& b = snk.site.subscripts;
    for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
      if (a[k] && b[k] && a[k]->var == b[k]->var)
        e.offset_delta.push_back(a[k]->offset - b[k]->offset);
      else
        e.offset_delta.push_back(std::nullopt);
    }
    edges_.push_back(std::move(e));
  }

  // Array reference pair within one routine.
  void pair(const Access& x, const Access& y) {
    std::size_t common = 0;
    while (common < x.loops.size() && common < y.loops.size() &&
           x.loops[common].stmt == y.loops[common].stmt)
      ++common;
    std::vector<Level> levels(common);
    const auto& sx = x.site.subscripts;
    const auto& sy = y.site.subscripts;
    for (std::size_t k = 0; k < sx.size() && k < sy.size(); ++k) {
      if (!sx[k] || !sy[k]) continue;
      if (sx[k]->var.empty() && sy[k]->var.empty()) {
        if (sx[k]->offset != sy[k]->offset) return;  // distinct constant elements
        continue;
      }
      if (sx[k]->var != sy[k]->var) continue;
      for (std::size_t l = 0; l < common; ++l) {
        if (x.loops[l].index != sx[k]->var) continue;
        std::int64_t d = sx[k]->offset - sy[k]->offset;
        if (levels[l].any) {
          levels[l] = Level{false, d};
        } else if (levels[l].d != d) {
          return;  // inconsistent distances: no overlap
        }
      }
    }
    walk(x, y, levels, 0);
  }

 private:
  std::vector<DependenceEdge>& edges_;

  void walk(const Access& x, const Access& y, const std::vector<Level>& levels, std::size_t k) {
    if (k == levels.size()) {
      if (x.site.stmt == y.site.stmt) return;  // within one statement
      if (x.order < y.order)
        emit(x, y, false, -1, std::nullopt, false);
      else
        emit(y, x, false, -1, std::nullopt, false);
      return;
    }
    int carrier = x.loops[k].stmt;
    const Level& lv = levels[k];
    if (lv.any) {
      emit(x, y, true, carrier, std::nullopt, false);
      emit(y, x, true, carrier, std::nullopt, false);
      walk(x, y, levels, k + 1);
    } else if (lv.d == 0) {
      walk(x, y, levels, k + 1);
    } else if (lv.d > 0) {
      emit(x, y, true, carrier, lv.d, false);
    } else {
      emit(y, x, true, carrier, -lv.d, false);
    }
  }
};

void collect_loops(const std::vector<Stmt>& body, std::vector<const Stmt*>& out) {
  for (const auto& s : body) {
    if (const auto* loop = std::get_if<DoLoop>(&s.node)) {
      out.push_back(&s);
      collect_loops(loop->body, out);
    }
  }
}

bool inside(const Access& a, int loop_stmt) {
  for (const auto& l : a.loops)
    if (l.stmt == loop_stmt) return true;
  return false;
}

// Scalars read before they are written in a loop body carry a value from one
// iteration to the next.
void scalar_edges(const Routine& r, const std::vector<Access>& acc, EdgeBuilder& eb) {
  std::vector<const Stmt*> loops;
  collect_loops(r.body, loops);
  for (const Stmt* ls : loops) {
    std::vector<std::string> written;
    for (const auto& a : acc)
      if (!a.is_array && a.site.write && inside(a, ls->id) &&
          std::find(written.begin(), written.end(), a.site.var) == written.end())
        written.push_back(a.site.var);
    for (const auto& v : written) {
      const Access* first = nullptr;
      const Access* first_write = nullptr;
      for (const auto& a : acc) {
        if (a.is_array || a.site.var != v || !inside(a, ls->id)) continue;
        if (!first) first = &a;
        if (a.site.write && !first_write) first_write = &a;
      }
      if (first && !first->site.write) eb.emit(*first_write, *first, true, ls->id, 1, false);
    }
  }
}

struct UnionFind {
  std::vector<int> parent;
  int add() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

void array_reads(const Expr& e, const RoutineScope& scope, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayRef>) {
          out.push_back(n.name);
        } else if constexpr (std::is_same_v<T, Unary>) {
          array_reads(*n.operand, scope, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          array_reads(*n.lhs, scope, out);
          array_reads(*n.rhs, scope, out);
        } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
          for (const auto& a : n.args) array_reads(a, scope, out);
        }
      },
      e.node);
}

std::string affine_text(const std::optional<Affine>& a) {
  if (!a) return "?";
  std::ostringstream os;
  if (a->var.empty()) {
    os << a->offset;
  } else {
    os << a->var;
    if (a->offset > 0) os << '+' << a->offset;
    if (a->offset < 0) os << a->offset;
  }
  return os.str();
}

std::string site_text(const AccessSite& s) {
  std::ostringstream os;
  os << s.var;
  if (!s.subscripts.empty()) {
    os << '(';
    for (std::size_t i = 0; i < s.subscripts.size(); ++i) {
      if (i) os << ',';
      os << affine_text(s.subscripts[i]);
    }
    os << ')';
  }
  os << " in " << s.routine << " s" << s.stmt;
  return os.str();
}

nlohmann::json site_json(const AccessSite& s) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& a : s.subscripts) {
    if (a)
      subs.push_back({{"var", a->var}, {"offset", a->offset}});
    else
      subs.push_back(nullptr);
  }
  return {{"routine", s.routine}, {"stmt", s.stmt}, {"ref", s.ref},
          {"var", s.var},         {"write", s.write}, {"subscripts", subs}};
}

}  // namespace

const DependenceEdge* DefUseDB::edge(int id) const {
  if (id < 0 || id >= static_cast<int>(edges.size())) return nullptr;
  return &edges[id];
}

bool DefUseDB::has_array(const std::string& routine, const std::string& array) const {
  return class_of.count({routine, array}) != 0;
}

std::vector<int> DefUseDB::may_define(const std::string& routine, const std::string& array) const {
  auto it = class_of.find({routine, array});
  if (it == class_of.end()) throw Error("UnknownArray", "no array '" + array + "' in " + routine);
  std::vector<int> out;
  for (const auto& member : classes[it->second]) {
    auto d = direct_defs.find(member);
    if (d != direct_defs.end()) out.insert(out.end(), d->second.begin(), d->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ReachingDef> DefUseDB::defs_reaching(const std::string& routine,
                                                 const std::string& array) const {
  auto it = class_of.find({routine, array});
  if (it == class_of.end()) throw Error("UnknownArray", "no array '" + array + "' in " + routine);
  std::vector<int> dist(classes.size(), -1);
  std::deque<int> queue{it->second};
  dist[it->second] = 0;
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int b : inflow[c]) {
      if (dist[b] >= 0) continue;
      dist[b] = dist[c] + 1;
      queue.push_back(b);
    }
  }
  std::vector<ReachingDef> out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (dist[c] < 0) continue;
    for (const auto& member : classes[c]) {
      auto d = direct_defs.find(member);
      if (d == direct_defs.end()) continue;
      out.push_back({member.first, member.second, dist[c], d->second});
    }
  }
  std::sort(out.begin(), out.end(), [](const ReachingDef& a, const ReachingDef& b) {
    return std::tie(a.distance, a.routine, a.array) < std::tie(b.distance, b.routine, b.array);
  });
  return out;
}

std::string DefUseDB::to_json() const {
  nlohmann::json j;
  j["v"] = 1;
  nlohmann::json es = nlohmann::json::array();
  for (const auto& e : edges) {
    nlohmann::json je = {{"id", e.id},
                         {"kind", to_string(e.kind)},
                         {"source", site_json(e.source)},
                         {"sink", site_json(e.sink)},
                         {"carried", e.loop_carried},
                         {"carrier", e.carrier},
                         {"interprocedural", e.interprocedural}};
    je["distance"] = e.distance ? nlohmann::json(*e.distance) : nlohmann::json(nullptr);
    nlohmann::json od = nlohmann::json::array();
    for (const auto& d : e.offset_delta) od.push_back(d ? nlohmann::json(*d) : nlohmann::json(nullptr));
    je["offset_delta"] = od;
    es.push_back(std::move(je));
  }
  j["edges"] = es;
  nlohmann::json defs = nlohmann::json::array();
  for (const auto& [k, v] : direct_defs) defs.push_back({{"routine", k.first}, {"array", k.second}, {"stmts", v}});
  j["defs"] = defs;
  nlohmann::json cls = nlohmann::json::array();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : classes[c]) members.push_back(m.first + "." + m.second);
    cls.push_back({{"members", members}, {"inflow", inflow[c]}});
  }
  j["classes"] = cls;
  return j.dump(2);
}

DefUseDB build_defuse(const Program& p) {
  SymbolTable table = typecheck(p);
  DefUseDB db;

  // Storage classes over (routine, array).
  UnionFind uf;
  std::vector<VarKey> keys;
  std::map<VarKey, int> node;
  for (const auto& r : p.routines) {
    for (const auto& d : r.decls) {
      if (!d.is_array()) continue;
      VarKey k{r.name, d.name};
      node[k] = uf.add();
      if (r.formal_position(d.name) > 0) db.formal_arrays.insert(k);
      keys.push_back(k);
    }
  }
  for (const auto& r : p.routines) {
    for_each_stmt(r.body, [&](const Stmt& s) {
      const auto* call = std::get_if<CallStmt>(&s.node);
      if (!call || is_resident_name(call->callee)) return;
      const Routine* callee = p.find(call->callee);
      for (std::size_t i = 0; i < call->args.size(); ++i) {
        const auto* name = std::get_if<NameRef>(&call->args[i].node);
        if (!name) continue;
        auto a = node.find({r.name, name->name});
        auto f = node.find({callee->name, callee->params[i]});
        if (a != node.end() && f != node.end()) uf.unite(a->second, f->second);
      }
    });
  }
  std::map<int, int> class_id;
  for (const auto& k : keys) {
    int root = uf.find(node[k]);
    auto [it, fresh] = class_id.emplace(root, static_cast<int>(db.classes.size()));
    if (fresh) db.classes.emplace_back();
    db.classes[it->second].push_back(k);
    db.class_of[k] = it->second;
  }
  db.inflow.resize(db.classes.size());

  // Direct definitions and value flow between classes.
  for (const auto& r : p.routines) {
    const RoutineScope& scope = table.scope(r.name);
    for_each_stmt(r.body, [&](const Stmt& s) {
      const auto* as = std::get_if<Assign>(&s.node);
      if (!as) return;
      const auto* t = std::get_if<ArrayRef>(&as->target.node);
      if (!t) return;
      db.direct_defs[{r.name, t->name}].push_back(s.id);
      std::vector<std::string> srcs;
      array_reads(as->value, scope, srcs);
      int tc = db.class_of.at({r.name, t->name});
      for (const auto& src : srcs) db.inflow[tc].insert(db.class_of.at({r.name, src}));
    });
  }

  // Dependence edges: intra-routine pairs, then scalar carries, then
  // interprocedural flow.
  EdgeBuilder eb(db.edges);
  std::vector<std::vector<Access>> per_routine;
  int order = 0;
  for (const auto& r : p.routines) {
    per_routine.emplace_back();
    Collector(r, table.scope(r.name), per_routine.back(), order).run();
    const auto& acc = per_routine.back();
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (!acc[i].is_array) continue;
      for (std::size_t j = i + 1; j < acc.size(); ++j) {
        if (!acc[j].is_array || acc[j].site.var != acc[i].site.var) continue;
        if (!acc[i].site.write && !acc[j].site.write) continue;
        eb.pair(acc[i], acc[j]);
      }
    }
    scalar_edges(r, acc, eb);
  }
  for (std::size_t ri = 0; ri < per_routine.size(); ++ri) {
    for (const auto& rd : per_routine[ri]) {
      if (!rd.is_array || rd.site.write) continue;
      int c = db.class_of.at({rd.site.routine, rd.site.var});
      for (std::size_t wi = 0; wi < per_routine.size(); ++wi) {
        if (wi == ri) continue;
        for (const auto& wr : per_routine[wi]) {
          if (!wr.is_array || !wr.site.write) continue;
          if (db.class_of.at({wr.site.routine, wr.site.var}) != c) continue;
          eb.emit(wr, rd, false, -1, std::nullopt, true);
        }
      }
    }
  }
  return db;
}

DependenceSet analyze_loop(const Program& p, const DefUseDB& db, const std::string& routine,
                           int loop_stmt) {
  const Routine* r = p.find(routine);
  if (!r) throw Error("UnknownRoutine", "no routine named '" + routine + "'");
  const Stmt* loop_s = nullptr;
  for_each_stmt(r->body, [&](const Stmt& s) {
    if (s.id == loop_stmt && std::holds_alternative<DoLoop>(s.node)) loop_s = &s;
  });
  if (!loop_s) throw Error("UnknownLoop", "statement " + std::to_string(loop_stmt) + " is not a loop");
  const auto& loop = std::get<DoLoop>(loop_s->node);

  DependenceSet out;
  out.routine = routine;
  out.loop = loop_stmt;
  out.index = loop.index;

  std::set<int> body;
  for_each_stmt(loop.body, [&](const Stmt& s) { body.insert(s.id); });
  for (const auto& e : db.edges) {
    if (e.source.routine != routine || e.sink.routine != routine) continue;
    if (body.count(e.source.stmt) && body.count(e.sink.stmt)) out.edges.push_back(e.id);
    if (e.carrier == loop_stmt) {
      out.carried.push_back(e.id);
      if (e.kind == DepKind::Flow) out.blocking.push_back(e.id);
    }
  }
  out.parallelizable = out.blocking.empty();

  // Cross-array reads displaced along this loop's index.
  std::set<std::string> written;
  for_each_stmt(loop.body, [&](const Stmt& s) {
    if (const auto* as = std::get_if<Assign>(&s.node))
      if (const auto* t = std::get_if<ArrayRef>(&as->target.node)) written.insert(t->name);
  });
  SymbolTable table = typecheck(p);
  const RoutineScope& scope = table.scope(routine);
  auto lookup = [&](const std::string& n) -> std::optional<std::int64_t> {
    const Symbol* s = scope.find(n);
    if (s && s->kind == Symbol::Kind::Constant) return s->value;
    return std::nullopt;
  };
  std::function<void(const Expr&, int, const std::vector<std::optional<Affine>>&)> scan;
  scan = [&](const Expr& e, int stmt, const std::vector<std::optional<Affine>>& target) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ArrayRef>) {
            if (written.count(n.name)) return;
            for (std::size_t k = 0; k < n.subscripts.size() && k < target.size(); ++k) {
              auto a = affine_of(n.subscripts[k], lookup);
              if (!a || !target[k] || a->var != loop.index || target[k]->var != loop.index) continue;
              if (a->offset != target[k]->offset)
                out.comm_reads.push_back(
                    {n.name, stmt, static_cast<int>(k) + 1, target[k]->offset - a->offset});
            }
          } else if constexpr (std::is_same_v<T, Unary>) {
            scan(*n.operand, stmt, target);
          } else if constexpr (std::is_same_v<T, Binary>) {
            scan(*n.lhs, stmt, target);
            scan(*n.rhs, stmt, target);
          } else if constexpr (std::is_same_v<T, IntrinsicCall>) {
            for (const auto& a : n.args) scan(a, stmt, target);
          }
        },
        e.node);
  };
  for_each_stmt(loop.body, [&](const Stmt& s) {
    const auto* as = std::get_if<Assign>(&s.node);
    if (!as) return;
    const auto* t = std::get_if<ArrayRef>(&as->target.node);
    if (!t) return;
    std::vector<std::optional<Affine>> target;
    for (const auto& sub : t->subscripts) target.push_back(affine_of(sub, lookup));
    scan(as->value, s.id, target);
  });
  return out;
}

std::vector<DependenceSet> analyze_all(const Program& p, const DefUseDB& db) {
  std::vector<DependenceSet> out;
  for (const auto& r : p.routines) {
    std::vector<const Stmt*> loops;
    collect_loops(r.body, loops);
    for (const Stmt* s : loops) out.push_back(analyze_loop(p, db, r.name, s->id));
  }
  return out;
}

std::vector<TargetRef> modifying_routines(const DefUseDB& db, const std::string& array,
                                          const std::string& scope) {
  std::map<std::string, std::pair<int, std::string>> best;
  for (const auto& rd : db.defs_reaching(scope, array)) {
    if (!db.formal_arrays.count({rd.routine, rd.array})) continue;
    auto cand = std::make_pair(rd.distance, rd.array);
    auto it = best.find(rd.routine);
    if (it == best.end() || cand < it->second) best[rd.routine] = cand;
  }
  std::vector<TargetRef> out;
  for (const auto& [routine, choice] : best) out.push_back({routine, choice.second});
  std::sort(out.begin(), out.end(), [](const TargetRef& a, const TargetRef& b) {
    return std::tie(a.array, a.routine) < std::tie(b.array, b.routine);
  });
  return out;
}

std::string describe_edge(const DependenceEdge& e) {
  std::ostringstream os;
  os << '#' << e.id << ' ' << to_string(e.kind) << "  " << site_text(e.source) << "  ->  "
     << site_text(e.sink);
  if (e.loop_carried) {
    os << "  carried by s" << e.carrier << " distance ";
    if (e.distance)
      os << *e.distance;
    else
      os << '*';
  } else {
    os << (e.interprocedural ? "  interprocedural" : "  loop-independent");
  }
  return os.str();
}

std::string describe_edges(const Program& p, const DefUseDB& db) {
  std::map<int, int> line_of;
  for (const auto& r : p.routines)
    for_each_stmt(r.body, [&](const Stmt& s) { line_of[s.id] = s.loc.line; });
  std::ostringstream os;
  for (const auto& e : db.edges) {
    os << describe_edge(e) << "  [line " << line_of[e.source.stmt] << " -> line "
       << line_of[e.sink.stmt] << "]\n";
  }
  return os.str();
}

}  // namespace relcheck::depan
