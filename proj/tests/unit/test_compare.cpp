#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <limits>

#include "relcheck/compare/compare.hpp"
#include "relcheck/compare/report.hpp"

using namespace relcheck;
using namespace relcheck::test;
using namespace relcheck::compare;

namespace {

ArrayValue filled(std::vector<lang::Extent> dims, double v) {
  ArrayValue a(std::move(dims));
  for (double& x : a.data) x = v;
  return a;
}

// Value 100*i + j at (i, j) so every element is distinguishable.
ArrayValue numbered(std::int64_t lo1, std::int64_t hi1, std::int64_t lo2, std::int64_t hi2) {
  ArrayValue a({{lo1, hi1}, {lo2, hi2}});
  for (auto j = lo2; j <= hi2; ++j)
    for (auto i = lo1; i <= hi1; ++i) a.at(i, j) = double(100 * i + j);
  return a;
}

partition::DistributionSpec dist(int dim, std::int64_t lo, std::int64_t hi, int nranks) {
  partition::DistributionSpec d;
  d.dim = dim;
  d.lo = lo;
  d.hi = hi;
  d.nranks = nranks;
  return d;
}

}  // namespace

TEST_SUITE("compare") {

TEST_CASE("checksums of a block of ones") {
  ArrayValue a = filled({{1, 21}, {1, 84}}, 1.0);
  CHECK(checksum(a) == 1764.0);
  auto d = dist(2, 1, 84, 4);
  for (int r = 0; r < 4; ++r) CHECK(contribute(a, d, r, false).checksum == 441.0);
  CHECK(checksum(a, d) == 1764.0);
  CHECK(checksum(a, 1, 3, 5) == 3 * 84.0);
  CHECK(code_of([&] { checksum(a, 1, 0, 5); }) == "BoundsMismatch");
}

TEST_CASE("checksum sums in storage order") {
  // 1e16 + 1 - 1e16 loses the 1 only when added in this order.
  std::vector<double> v = {1e16, 1.0, -1e16};
  CHECK(checksum(v) == 0.0);
  std::vector<double> w = {1e16, -1e16, 1.0};
  CHECK(checksum(w) == 1.0);
}

TEST_CASE("tolerances") {
  ComparisonMode abs{Mode::ElementWise, 0.5, false};
  CHECK(abs.within(10.0, 10.5));
  CHECK_FALSE(abs.within(10.0, 10.6));
  ComparisonMode rel{Mode::ElementWise, 0.01, true};
  CHECK(rel.within(1000.0, 1009.0));
  CHECK_FALSE(rel.within(1000.0, 1011.0));
  CHECK(rel.within(0.0, 0.01));  // scale never drops below one
  double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(abs.within(1.0, nan));
  CHECK(abs.within(nan, nan));

  CHECK(mode_from_string("partial") == Mode::PartialChecksum);
  CHECK(std::string(to_string(Mode::GlobalChecksum)) == "global");
  CHECK(code_of([] { mode_from_string("bitwise"); }) == "BadMode");
  CHECK(code_of([] { ComparisonMode{Mode::ElementWise, -1.0, false}.validate(); }) == "BadTolerance");
  CHECK(code_of([] { ComparisonMode{Mode::ElementWise, INFINITY, false}.validate(); }) == "BadTolerance");
}

TEST_CASE("global comparison") {
  CHECK(compare_global(10.0, {4.0, 6.0}, 0.0).pass);
  auto v = compare_global(10.0, {4.0, 6.5}, 0.1);
  CHECK_FALSE(v.pass);
  CHECK(v.delta == -0.5);
}

TEST_CASE("partial comparison names the first failing rank") {
  ArrayValue serial = numbered(0, 9, 1, 3);
  auto d = dist(1, 0, 9, 3);
  ArrayValue par = serial;
  par.at(9, 2) += 1.0;  // rank 2
  par.at(5, 1) += 1.0;  // rank 1
  std::vector<Contribution> cs;
  for (int r = 2; r >= 0; --r) cs.push_back(contribute(par, d, r, false));  // arrival order is irrelevant
  auto v = compare_partial(serial, cs, d, ComparisonMode{Mode::PartialChecksum, 0.0, false});
  CHECK_FALSE(v.pass);
  REQUIRE(v.failing_rank);
  CHECK(*v.failing_rank == 1);
  CHECK(v.rank_pass == std::vector<bool>{true, false, false});
  CHECK(v.delta == -1.0);

  cs.pop_back();
  CHECK(code_of([&] { compare_partial(serial, cs, d, {}); }) == "MissingRank");
  cs.push_back(cs[0]);
  CHECK(code_of([&] { compare_partial(serial, cs, d, {}); }) == "OverlapDetected");
}

TEST_CASE("element comparison lists diffs by global index") {
  ArrayValue serial = numbered(1, 6, 1, 2);
  auto d = dist(1, 1, 6, 2);
  ArrayValue par = serial;
  par.at(5, 1) = -1.0;
  par.at(2, 2) = -2.0;
  par.at(1, 1) = -3.0;
  auto v = compare_element(serial, scatter(par, d), d, ComparisonMode{});
  REQUIRE(v.diffs.size() == 3);
  CHECK(v.diffs[0] == Diff{{1, 1}, 101.0, -3.0, 0});
  CHECK(v.diffs[1] == Diff{{5, 1}, 501.0, -1.0, 1});
  CHECK(v.diffs[2] == Diff{{2, 2}, 202.0, -2.0, 0});

  auto cs = scatter(par, d);
  cs[1].lo += 1;
  CHECK(code_of([&] { compare_element(serial, cs, d, {}); }) == "BoundsMismatch");
}

TEST_CASE("scatter and reassemble along the second dimension") {
  ArrayValue a = numbered(-1, 2, 0, 6);
  auto d = dist(2, 0, 6, 3);
  auto parts = scatter(a, d);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].lo == 0);
  CHECK(parts[0].hi == 2);
  CHECK(parts[0].block->dims[1] == lang::Extent{0, 2});
  CHECK(parts[0].block->at(-1, 2) == a.at(-1, 2));
  CHECK(bit_equal(reassemble(parts, d), a));
  parts[2].block.reset();
  CHECK(code_of([&] { reassemble(parts, d); }) == "BoundsMismatch");
}

TEST_CASE("bit equality distinguishes signed zeros") {
  ArrayValue a = filled({{1, 2}}, 0.0), b = filled({{1, 2}}, -0.0);
  CHECK(a == b);
  CHECK_FALSE(bit_equal(a, b));
}

TEST_CASE("report JSON round trip and message") {
  ArrayValue serial = numbered(1, 4, 1, 1);
  auto d = dist(1, 1, 4, 2);
  ArrayValue par = serial;
  par.at(4, 1) = 0.5;
  ComparisonMode m{Mode::ElementWise, 0.0, false};
  auto v = compare_element(serial, scatter(par, d), d, m);
  auto r = make_report("update", "exit", 1, "phi4", m, v);
  r.spmd_source = "subroutine update(phi4)\nend subroutine update\n";
  auto back = parse_report(report_text(r));
  CHECK(back == r);
  std::string msg = message(r);
  CHECK(msg.rfind("Value of array phi4 differs at exit of update (invocation 1)", 0) == 0);
  CHECK(msg.find("phi4(4, 1) serial 401 parallel 0.5 rank 1") != std::string::npos);

  auto g = make_report("update", "exit", 1, "phi4", ComparisonMode{Mode::GlobalChecksum, 1e-9, false},
                       compare_global(1.0, {2.0}, 1e-9));
  REQUIRE(g.checksum_delta);
  CHECK(parse_report(report_text(g)) == g);

  CHECK(code_of([] { parse_report("{}"); }) == "MalformedReport");
  CHECK(code_of([] { parse_report("[1, 2"); }) == "MalformedReport");
  DivergenceReport empty;
  empty.routine = "update";
  empty.site = "exit";
  empty.invocation = 1;
  empty.array = "phi4";
  CHECK(code_of([&] { empty.validate(); }) == "MalformedReport");
}

}
