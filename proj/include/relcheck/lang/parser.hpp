#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relcheck/lang/ast.hpp"

namespace relcheck::lang {

struct SyntaxError {
  int line = 0;
  int col = 0;
  std::string message;
};

struct ParseResult {
  std::optional<Program> program;
  std::vector<SyntaxError> errors;

  bool ok() const { return program.has_value() && errors.empty(); }
};

// Parsing is total: malformed input yields diagnostics, never an exception.
ParseResult parse(std::string_view source);

// Throws relcheck::Error("SyntaxError", ...) listing every diagnostic.
Program parse_or_throw(std::string_view source);

std::string format_errors(const std::vector<SyntaxError>& errors);

}  // namespace relcheck::lang
