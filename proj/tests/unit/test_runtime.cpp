#include <doctest.h>

#include "support.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "relcheck/cli/session.hpp"
#include "relcheck/compare/compare.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"
#include "relcheck/runtime/runtime.hpp"

using namespace relcheck;
using namespace relcheck::test;
using runtime::ProcState;

namespace {

const char* kCounter =
    "program main\n  real*8 a(1:4)\n  integer k\n  do k = 1, 3\n    call bump(a)\n  end do\nend program main\n"
    "subroutine bump(x)\n  real*8 x(1:4)\n  integer i\n  do i = 1, 4\n    x(i) = x(i) + i\n  end do\n"
    "  return\nend subroutine bump\n";

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("serial stencil: every interior point becomes one") {
  runtime::Runtime rt;
  auto r = runtime::run_serial(rt, program("fig1.mf"));
  REQUIRE_FALSE(r.faulted);
  const ArrayValue* u = r.finals[0].array("main", "u");
  REQUIRE(u != nullptr);
  CHECK(compare::checksum(*u) == 1024.0);
  CHECK(u->at(1, 1) == 1.0);
  CHECK(u->at(0, 5) == 0.0);
}

TEST_CASE("SPMD stencil agrees with serial on owned blocks and writes the contact file") {
  auto serial = program("fig1.mf");
  auto dist = partition::make_distribution(serial, "u", "main", 1, 4);
  auto spmd = partition::parallelize(serial, dist, depan::build_defuse(serial), {}).program;
  runtime::Runtime rt;
  auto s = runtime::run_serial(rt, serial);
  std::string contact = (std::filesystem::temp_directory_path() / "relcheck-unit.contact").string();
  auto p = runtime::run_spmd(rt, spmd, 4, contact);
  REQUIRE_FALSE(p.faulted);
  for (int r = 0; r < 4; ++r) {
    auto c = compare::contribute(*p.finals[r].array("main", "u"), dist, r, true);
    CHECK(c.checksum == compare::checksum(*s.finals[0].array("main", "u"), 1, c.lo, c.hi));
  }

  std::istringstream in(cli::read_file(contact));
  std::set<int> ranks;
  int rank, pid;
  std::string label;
  while (in >> rank >> pid >> label) {
    ranks.insert(rank);
    CHECK(label == "a.out");
    CHECK(std::find(p.pids.begin(), p.pids.end(), pid) != p.pids.end());
  }
  CHECK(ranks == std::set<int>{0, 1, 2, 3});
  std::filesystem::remove(contact);
}

TEST_CASE("pids are distinct across launches") {
  runtime::Runtime rt;
  auto a = runtime::run_serial(rt, inline_program(kCounter));
  auto b = runtime::run_serial(rt, inline_program(kCounter));
  CHECK(a.pids[0] != b.pids[0]);
}

TEST_CASE("receives that can never be satisfied are a deadlock") {
  // Each rank waits on the other before sending anything.
  auto p = inline_program(
      "spmd program main\n  real*8 a(1:2)\n  receive(a(1), 1, 1 - myrank())\n"
      "  send(a(2), 1, 1 - myrank())\nend program main\n");
  runtime::Runtime rt;
  auto r = runtime::run_spmd(rt, p, 2, "");
  CHECK(r.faulted);
  CHECK(r.fault_code == "Deadlock");

  auto ok = inline_program(
      "spmd program main\n  real*8 a(1:2)\n  a(2) = myrank() + 5\n  send(a(2), 1, 1 - myrank())\n"
      "  receive(a(1), 1, 1 - myrank())\nend program main\n");
  auto r2 = runtime::run_spmd(rt, ok, 2, "");
  REQUIRE_FALSE(r2.faulted);
  CHECK(r2.finals[0].array("main", "a")->at(std::int64_t(1)) == 6.0);
  CHECK(r2.finals[1].array("main", "a")->at(std::int64_t(1)) == 5.0);
}

TEST_CASE("breakpoints stop the process and memory is readable while stopped") {
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.breakpoints = {{"bump", runtime::Site::Exit}};
  runtime::Process& proc = rt.launch_serial(inline_program(kCounter), opts);
  CHECK(code_of([&] { proc.read_mem("me", "bump", "x"); }) == "NotAttached");
  proc.attach("me");
  CHECK(code_of([&] { proc.attach("other"); }) == "AlreadyAttached");
  proc.start();
  for (int hit = 1; hit <= 3; ++hit) {
    auto ev = proc.wait_event(std::chrono::seconds(5));
    REQUIRE(ev);
    REQUIRE(ev->kind == runtime::Event::Kind::Breakpoint);
    CHECK(ev->routine == "bump");
    CHECK(ev->invocation == hit);
    CHECK(proc.state() == ProcState::Stopped);
    runtime::MemValue v = proc.read_mem("me", "bump", "x");
    REQUIRE(v.is_array);
    CHECK(v.array.at(std::int64_t(4)) == 4.0 * hit);
    CHECK(code_of([&] { proc.read_mem("me", "bump", "nosuch"); }) == "UnknownVariable");
    if (hit == 2) {
      v.array.at(std::int64_t(1)) = 100.0;
      proc.write_mem("me", "bump", "x", v);
    }
    proc.continue_();
  }
  auto ev = proc.wait_event(std::chrono::seconds(5));
  REQUIRE(ev);
  CHECK(ev->kind == runtime::Event::Kind::Exited);
  proc.join();
  CHECK(proc.final_state().array("main", "a")->at(std::int64_t(1)) == 101.0);
  CHECK(code_of([&] { proc.continue_(); }) == "NoSuchPid");
}

TEST_CASE("instrumentation needs a halted process and valid positions") {
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.stop_at_entry = true;
  runtime::Process& proc = rt.launch_serial(inline_program(kCounter), opts);
  proc.start();
  auto ev = proc.wait_event(std::chrono::seconds(5));
  REQUIRE(ev);
  CHECK(ev->kind == runtime::Event::Kind::Stopped);
  CHECK(code_of([&] { proc.create_point("nosuch", runtime::Site::Entry); }) == "UnknownRoutine");
  int pt = proc.create_point("bump", runtime::Site::Entry);
  CHECK(code_of([&] { proc.insert_call(pt + 7, {"__anything", {1}, {}}); }) == "UnknownPoint");
  CHECK(code_of([&] { proc.insert_call(pt, {"bump", {2}, {}}); }) == "BadArgPosition");
  CHECK(code_of([&] { proc.insert_call(pt, {"bump", {1, 1}, {}}); }) == "BadArgPosition");
  CHECK(proc.last_point() == pt);
  proc.terminate();
  proc.join();
  CHECK(proc.fault_code() == "Terminated");
}

TEST_CASE("a program routine patched in at entry runs with the bound formal") {
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.stop_at_entry = true;
  // extra is never called by the program itself.
  std::string src = std::string(kCounter) +
                    "subroutine extra(y)\n  real*8 y(1:4)\n  y(1) = y(1) + 10\n  return\nend subroutine extra\n";
  runtime::Process& proc = rt.launch_serial(inline_program(src), opts);
  proc.start();
  REQUIRE(proc.wait_event(std::chrono::seconds(5)));
  proc.insert_call(proc.create_point("bump", runtime::Site::Entry), {"extra", {1}, {}});
  proc.continue_();
  proc.join();
  REQUIRE_FALSE(proc.faulted());
  CHECK(proc.final_state().array("main", "a")->at(std::int64_t(1)) == 33.0);
  CHECK(proc.final_state().array("main", "a")->at(std::int64_t(3)) == 9.0);
}

TEST_CASE("a routine patched into its own entry faults instead of overflowing") {
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.stop_at_entry = true;
  runtime::Process& proc = rt.launch_serial(inline_program(kCounter), opts);
  proc.start();
  REQUIRE(proc.wait_event(std::chrono::seconds(5)));
  proc.insert_call(proc.create_point("bump", runtime::Site::Entry), {"bump", {1}, {}});
  proc.continue_();
  proc.join();
  CHECK(proc.faulted());
  CHECK(proc.fault_code() == "RuntimeFault");
}

TEST_CASE("scheduler jitter does not change results") {
  auto serial = program("jacobi.mf");
  auto dist = partition::make_distribution(serial, "phi2", "jacobi", 1, 4);
  auto spmd = partition::parallelize(serial, dist, depan::build_defuse(serial), {}).program;
  runtime::Runtime rt;
  auto base = runtime::run_spmd(rt, spmd, 4, "");
  for (std::uint64_t seed : {3u, 17u}) {
    runtime::LaunchOptions opts;
    opts.sched_seed = seed;
    auto jittered = runtime::run_spmd(rt, spmd, 4, "", opts);
    REQUIRE_FALSE(jittered.faulted);
    for (int r = 0; r < 4; ++r) CHECK(jittered.finals[r] == base.finals[r]);
  }
}

}
