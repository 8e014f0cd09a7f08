#include <doctest.h>

#include "support.hpp"

#include <algorithm>

#include "relcheck/cli/session.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/typecheck.hpp"

using namespace relcheck;
using namespace relcheck::test;

namespace {

const depan::DependenceEdge* find_edge(const depan::DefUseDB& db, depan::DepKind kind, const std::string& src,
                                       const std::string& sink, std::int64_t sink_offset) {
  for (const auto& e : db.edges)
    if (e.kind == kind && e.source.var == src && e.sink.var == sink && !e.sink.subscripts.empty() &&
        e.sink.subscripts[0] && e.sink.subscripts[0]->offset == sink_offset)
      return &e;
  return nullptr;
}

}  // namespace

TEST_SUITE("depan") {

TEST_CASE("recurrence carries a distance-1 flow edge") {
  auto p = program("triptych_recurrence.mf");
  auto db = depan::build_defuse(p);
  // The init loop also reaches a(i-1), loop-independently.
  const depan::DependenceEdge* e = nullptr;
  for (const auto& x : db.edges)
    if (x.kind == depan::DepKind::Flow && x.source.var == "a" && x.sink.var == "a" && x.loop_carried) e = &x;
  REQUIRE(e != nullptr);
  CHECK(e->sink.subscripts[0]->offset == -1);
  REQUIRE(e->distance);
  CHECK(*e->distance == 1);

  auto sets = depan::analyze_all(p, db);
  auto blocked = std::count_if(sets.begin(), sets.end(), [](const auto& s) { return !s.parallelizable; });
  CHECK(blocked == 1);
}

TEST_CASE("local and shifted loops carry nothing") {
  for (const char* name : {"triptych_local.mf", "triptych_shift.mf"}) {
    CAPTURE(name);
    auto p = program(name);
    auto db = depan::build_defuse(p);
    for (const auto& s : depan::analyze_all(p, db)) {
      CHECK(s.parallelizable);
      CHECK(s.blocking.empty());
    }
  }
  auto p = program("triptych_shift.mf");
  auto db = depan::build_defuse(p);
  const auto* e = find_edge(db, depan::DepKind::Flow, "b", "b", -1);
  REQUIRE(e != nullptr);
  CHECK_FALSE(e->loop_carried);
}

TEST_CASE("jacobi stencil reads four neighbours of the copy") {
  auto p = program("jacobi.mf");
  auto db = depan::build_defuse(p);
  int reads = 0;
  for (const auto& e : db.edges)
    if (e.kind == depan::DepKind::Flow && e.source.var == "oldphi8" && e.sink.var == "oldphi8") ++reads;
  CHECK(reads == 4);
  const auto* right = find_edge(db, depan::DepKind::Flow, "oldphi8", "oldphi8", 1);
  REQUIRE(right != nullptr);
  CHECK(right->id == 1);
  CHECK(depan::describe_edge(*right).rfind("#1 flow", 0) == 0);
}

TEST_CASE("storage classes follow call bindings") {
  auto p = program("jacobi.mf");
  auto db = depan::build_defuse(p);
  CHECK(db.class_of.at({"jacobi", "phi2"}) == db.class_of.at({"update", "phi4"}));
  CHECK(db.class_of.at({"jacobi", "phi2"}) == db.class_of.at({"setup_grid", "phi6"}));
  CHECK(db.class_of.at({"jacobi", "phi2"}) != db.class_of.at({"jacobi", "oldphi2"}));
  CHECK(db.formal_arrays.count({"update", "phi4"}));
  CHECK_FALSE(db.formal_arrays.count({"update", "oldphi8"}));
}

TEST_CASE("routines modifying a monitored array") {
  auto p = program("jacobi.mf");
  auto db = depan::build_defuse(p);
  auto targets = depan::modifying_routines(db, "phi2", "jacobi");
  auto has = [&](const std::string& r, const std::string& a) {
    return std::find(targets.begin(), targets.end(), depan::TargetRef{r, a}) != targets.end();
  };
  CHECK(has("update", "phi4"));
  CHECK(has("setup_grid", "phi6"));
  CHECK_FALSE(has("output", "phi3"));  // only read there
}

}
