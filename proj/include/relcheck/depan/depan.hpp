#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "relcheck/lang/ast.hpp"

namespace relcheck::depan {

enum class DepKind { Flow, Anti, Output };

const char* to_string(DepKind k);

// One reference to a variable inside a statement. `ref` is the ordinal of the
// reference within its statement, so repeated reads such as a(i-1) and a(i+1)
// stay distinguishable. Scalars have no subscripts.
struct AccessSite {
  std::string routine;
  int stmt = -1;
  int ref = 0;
  std::string var;
  bool write = false;
  std::vector<std::optional<lang::Affine>> subscripts;

  bool operator==(const AccessSite&) const = default;
};

struct DependenceEdge {
  int id = 0;
  DepKind kind = DepKind::Flow;
  AccessSite source;
  AccessSite sink;
  bool loop_carried = false;
  int carrier = -1;                      // loop statement id when carried
  std::optional<std::int64_t> distance;  // sink iteration - source iteration; unset if unknown
  // Loop-independent edges: per dimension, source offset minus sink offset
  // when both subscripts use the same index name.
  std::vector<std::optional<std::int64_t>> offset_delta;
  bool interprocedural = false;

  bool operator==(const DependenceEdge&) const = default;
};

using VarKey = std::pair<std::string, std::string>;  // (routine, array)

struct ReachingDef {
  std::string routine;
  std::string array;
  int distance = 0;  // value-flow hops from the queried array
  std::vector<int> stmts;
};

struct TargetRef {
  std::string routine;
  std::string array;
  bool operator==(const TargetRef&) const = default;
};

class DefUseDB {
 public:
  std::vector<DependenceEdge> edges;
  // Statements assigning each array directly, keyed by (routine, local name).
  std::map<VarKey, std::vector<int>> direct_defs;
  // Arrays sharing storage through formal/actual binding.
  std::map<VarKey, int> class_of;
  std::vector<std::vector<VarKey>> classes;
  // inflow[c]: classes whose values are read in assignments to class c.
  std::vector<std::set<int>> inflow;
  // Arrays that are formal parameters of their routine.
  std::set<VarKey> formal_arrays;

  const DependenceEdge* edge(int id) const;
  bool has_array(const std::string& routine, const std::string& array) const;
  // Every statement that may write the storage named by (routine, array).
  std::vector<int> may_define(const std::string& routine, const std::string& array) const;
  // Breadth-first over value flow: routines whose definitions may reach a
  // read of `array` in `routine`.
  std::vector<ReachingDef> defs_reaching(const std::string& routine, const std::string& array) const;

  std::string to_json() const;
};

DefUseDB build_defuse(const lang::Program& p);

// A read of another array whose element lives `distance` iterations away
// from the iteration that writes it.
struct CommRead {
  std::string array;
  int stmt = -1;
  int dim = 1;
  std::int64_t distance = 0;
};

struct DependenceSet {
  std::string routine;
  int loop = -1;
  std::string index;
  std::vector<int> edges;     // edges whose source and sink both lie in the loop
  std::vector<int> carried;   // edges carried by this loop
  std::vector<int> blocking;  // carried flow edges
  std::vector<CommRead> comm_reads;
  bool parallelizable = true;
};

DependenceSet analyze_loop(const lang::Program& p, const DefUseDB& db, const std::string& routine,
                           int loop_stmt);
// Every loop in the program, in statement order.
std::vector<DependenceSet> analyze_all(const lang::Program& p, const DefUseDB& db);

// Formal-parameter arrays to instrument when monitoring `array` in `scope`:
// one entry per routine, ordered by local array name then routine.
std::vector<TargetRef> modifying_routines(const DefUseDB& db, const std::string& array,
                                          const std::string& scope);

// Text listing in the style of a dependence browser.
std::string describe_edges(const lang::Program& p, const DefUseDB& db);
std::string describe_edge(const DependenceEdge& e);

}  // namespace relcheck::depan
