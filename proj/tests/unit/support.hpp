#pragma once

#include <functional>
#include <string>

#include "relcheck/cli/session.hpp"
#include "relcheck/error.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/typecheck.hpp"

namespace relcheck::test {

// A checked program from the programs/ directory.
inline lang::Program program(const std::string& name) {
  auto p = lang::parse_or_throw(cli::read_file(std::string(RELCHECK_SOURCE_DIR) + "/programs/" + name));
  lang::typecheck(p);
  return p;
}

inline lang::Program inline_program(const std::string& src) {
  auto p = lang::parse_or_throw(src);
  lang::typecheck(p);
  return p;
}

// Code of the relcheck::Error thrown by f, or "" when nothing is thrown.
inline std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace relcheck::test
