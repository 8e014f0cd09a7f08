#include <doctest.h>

#include "support.hpp"

#include "relcheck/cli/session.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"

using namespace relcheck;
using namespace relcheck::test;
using partition::block_bounds;

namespace {

int exchanges(const lang::Program& p) {
  int n = 0;
  for (const auto& r : p.routines)
    lang::for_each_stmt(r.body, [&](const lang::Stmt& s) { n += std::holds_alternative<lang::Exchange>(s.node); });
  return n;
}

using Block = std::pair<std::int64_t, std::int64_t>;

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("block bounds hand the remainder to low ranks") {
  CHECK(block_bounds(1, 10, 3, 0) == Block{1, 4});
  CHECK(block_bounds(1, 10, 3, 1) == Block{5, 7});
  CHECK(block_bounds(1, 10, 3, 2) == Block{8, 10});
  // The Jacobi grid: 44 rows over 4 ranks.
  CHECK(block_bounds(0, 43, 4, 0) == Block{0, 10});
  CHECK(block_bounds(0, 43, 4, 1) == Block{11, 21});
  CHECK(block_bounds(0, 43, 4, 2) == Block{22, 32});
  CHECK(block_bounds(0, 43, 4, 3) == Block{33, 43});
  // 34 rows: two ranks of 9, two of 8.
  CHECK(block_bounds(0, 33, 4, 1) == Block{9, 17});
  CHECK(block_bounds(0, 33, 4, 3) == Block{26, 33});

  CHECK(code_of([] { block_bounds(1, 0, 1, 0); }) == "EmptyRange");
  CHECK(code_of([] { block_bounds(1, 3, 4, 0); }) == "InvalidRank");
  CHECK(code_of([] { block_bounds(1, 8, 2, 2); }) == "InvalidRank");
  CHECK(code_of([] { block_bounds(1, 8, 0, 0); }) == "InvalidRank");
}

TEST_CASE("owner inverts the blocks") {
  partition::DistributionSpec d;
  d.lo = -3;
  d.hi = 17;
  d.nranks = 5;
  for (int r = 0; r < d.nranks; ++r) {
    auto [l, h] = d.bounds(r);
    for (auto i = l; i <= h; ++i) CHECK(d.owner(i) == r);
  }
  CHECK(d.owner(18) == -1);
}

TEST_CASE("alignment follows bindings and shared loop indices") {
  auto p = program("fig1.mf");
  auto d = partition::make_distribution(p, "u", "main", 1, 4);
  CHECK(d.lo == 0);
  CHECK(d.hi == 33);
  for (const auto& [r, a] : std::vector<std::pair<std::string, std::string>>{
           {"main", "u"}, {"main", "v"}, {"loop", "upar"}, {"loop", "vpar"}})
    CHECK(d.covers(r, a));

  CHECK(code_of([&] { partition::make_distribution(p, "w", "main", 1, 4); }) == "UnknownArray");
  CHECK(code_of([&] { partition::make_distribution(p, "u", "main", 3, 4); }) == "InvalidDimension");
  CHECK(code_of([&] { partition::make_distribution(p, "u", "main", 1, 0); }) == "InvalidRank");
}

TEST_CASE("dropping the right-neighbour edge drops one exchange") {
  auto p = program("jacobi.mf");
  auto db = depan::build_defuse(p);
  auto dist = partition::make_distribution(p, "phi2", "jacobi", 1, 4);
  auto good = partition::parallelize(p, dist, db, {});
  auto bug = partition::parallelize(p, dist, db, {1});
  CHECK(exchanges(good.program) == 2);
  CHECK(exchanges(bug.program) == 1);
  CHECK(bug.db.removed_edges == std::vector<int>{1});
  CHECK(code_of([&] { partition::parallelize(p, dist, db, {999}); }) == "UnknownEdgeId");
}

TEST_CASE("halo wider than a block is rejected") {
  auto p = inline_program(
      "program main\n  real*8 a(1:8), b(1:8)\n  integer i\n  do i = 1, 8\n    b(i) = i\n  end do\n"
      "  do i = 3, 8\n    a(i) = b(i-2)\n  end do\nend program main\n");
  auto db = depan::build_defuse(p);
  auto fine = partition::make_distribution(p, "a", "main", 1, 2);
  CHECK_NOTHROW(partition::parallelize(p, fine, db, {}));
  auto thin = partition::make_distribution(p, "a", "main", 1, 8);
  CHECK(code_of([&] { partition::parallelize(p, thin, db, {}); }) == "HaloExceedsBlock");
}

TEST_CASE("generated program keeps statement structure printable") {
  auto p = program("jacobi.mf");
  auto res = partition::parallelize(p, partition::make_distribution(p, "phi2", "jacobi", 1, 3), depan::build_defuse(p), {});
  CHECK(res.program.form == lang::Form::Spmd);
  auto again = lang::parse_or_throw(lang::pretty_print(res.program));
  CHECK(again == res.program);
  CHECK_NOTHROW(lang::typecheck(again));
}

TEST_CASE("database JSON round trip") {
  auto p = program("fig1.mf");
  auto res = partition::parallelize(p, partition::make_distribution(p, "u", "main", 1, 4), depan::build_defuse(p), {});
  REQUIRE(res.db.distributions.size() == 1);
  CHECK(partition::from_json(partition::to_json(res.db)) == res.db);
  CHECK(res.db.distribution_of("loop", "vpar") != nullptr);
  CHECK(code_of([] { partition::from_json("{\"v\": 1, \"distributions\": 3}"); }) == "MalformedDatabase");
  CHECK(code_of([] { partition::from_json("not json"); }) == "MalformedDatabase");
}

}
