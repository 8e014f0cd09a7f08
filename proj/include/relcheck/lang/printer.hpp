#pragma once

#include <string>

#include "relcheck/lang/ast.hpp"

namespace relcheck::lang {

// Canonical source text; parse(pretty_print(p)) is structurally equal to p.
std::string pretty_print(const Program& p);
std::string print_routine(const Program& p, const Routine& r);
std::string print_expr(const Expr& e);

}  // namespace relcheck::lang
