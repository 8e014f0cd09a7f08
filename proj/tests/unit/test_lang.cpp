#include <doctest.h>

#include "support.hpp"

#include <filesystem>

#include "relcheck/cli/session.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"

using namespace relcheck;
using namespace relcheck::test;

namespace {

std::string check_code(const std::string& src) {
  try {
    lang::typecheck(lang::parse_or_throw(src));
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_SUITE("lang") {

TEST_CASE("every shipped program survives a print/parse round trip") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(RELCHECK_SOURCE_DIR) + "/programs")) {
    if (entry.path().extension() != ".mf") continue;
    CAPTURE(entry.path().string());
    lang::Program p = lang::parse_or_throw(cli::read_file(entry.path().string()));
    lang::typecheck(p);
    lang::Program again = lang::parse_or_throw(lang::pretty_print(p));
    CHECK(again == p);
    CHECK(lang::pretty_print(again) == lang::pretty_print(p));
    ++n;
  }
  CHECK(n >= 6);
}

TEST_CASE("continuation lines and case folding") {
  auto p = lang::parse_or_throw(
      "PROGRAM Main\n  REAL*8 A(1:4)\n  integer i\n  do I = 1, 4\n    a(i) = 1.0 + &\n      i\n  END DO\nend program main\n");
  const auto& body = p.main().body;
  REQUIRE(body.size() == 1);
  const auto& loop = std::get<lang::DoLoop>(body[0].node);
  CHECK(loop.index == "i");
  CHECK(lang::print_expr(std::get<lang::Assign>(loop.body[0].node).value) == "1.0 + i");
}

TEST_CASE("syntax errors are collected with positions") {
  auto r = lang::parse("program p\n  integer i\n  i = \nend program p\n");
  CHECK_FALSE(r.ok());
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].line == 3);
  CHECK_THROWS_AS(lang::parse_or_throw("program p\n  do i = 1\nend program p\n"), Error);
}

TEST_CASE("typecheck codes") {
  CHECK(check_code("program p\n  x = 1\nend program p\n") == "UndeclaredName");
  CHECK(check_code("program p\n  real*8 a(4)\n  a(1, 2) = 0.0\nend program p\n") == "RankMismatch");
  CHECK(check_code("program p\n  real*8 a(4)\n  exchange(a(1), a(2), 1, left)\nend program p\n") ==
        "CommInSerialProgram");
  CHECK(check_code("program p\n  call q()\nend program p\n") == "UnknownRoutine");
  CHECK(check_code("program p\n  real*8 a(4)\n  call q(a)\nend program p\n"
                   "subroutine q(x, y)\n  real*8 x(4), y(4)\n  return\nend subroutine q\n") == "ArgumentMismatch");
  CHECK(check_code("program p\n  real*8 a(4:1)\nend program p\n") == "InvalidBounds");
  CHECK(check_code("program p\n  real*8 a(4)\n  integer i\n  a(i) = 0.0\nend program p\n") == "");
}

TEST_CASE("parameters fold into bounds and symbols") {
  auto p = lang::parse_or_throw("parameter (n = 6)\nprogram p\n  real*8 a(0:n+1)\nend program p\n");
  auto st = lang::typecheck(p);
  const lang::Symbol* a = st.lookup("p", "a");
  REQUIRE(a != nullptr);
  CHECK(a->dims[0] == lang::Extent{0, 7});
  CHECK(st.lookup("p", "n")->value == 6);
}

TEST_CASE("affine subscripts") {
  auto none = [](const std::string&) -> std::optional<std::int64_t> { return std::nullopt; };
  CHECK(lang::affine_of(lang::offset_expr(lang::name_ref("i"), -1), none) == lang::Affine{"i", -1});
  CHECK(lang::affine_of(lang::binary(lang::BinOp::Add, lang::int_lit(2), lang::name_ref("j")), none) ==
        lang::Affine{"j", 2});
  CHECK_FALSE(lang::affine_of(lang::binary(lang::BinOp::Mul, lang::int_lit(2), lang::name_ref("j")), none));
}

}
