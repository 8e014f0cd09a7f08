#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relcheck/lang/ast.hpp"

namespace relcheck::lang {

struct Symbol {
  enum class Kind { Constant, Scalar, Array, LoopIndex };
  Kind kind = Kind::Scalar;
  ScalarType type = ScalarType::Real;
  std::vector<Extent> dims;  // arrays only
  int formal = 0;            // 1-based formal position, 0 for locals
  std::int64_t value = 0;    // constants only

  bool is_array() const { return kind == Kind::Array; }
  bool is_integer_scalar() const {
    return kind != Kind::Array && type == ScalarType::Integer;
  }
};

struct RoutineScope {
  std::string name;
  std::map<std::string, Symbol> symbols;  // includes visible file-scope constants

  const Symbol* find(const std::string& n) const;
};

class SymbolTable {
 public:
  std::map<std::string, RoutineScope> routines;

  const RoutineScope& scope(const std::string& routine) const;
  const Symbol* lookup(const std::string& routine, const std::string& name) const;
};

// Throws relcheck::Error with codes UndeclaredName, RankMismatch,
// CommInSerialProgram, DuplicateRoutine, UnknownRoutine, ArgumentMismatch,
// UnsupportedSubscript, TypeMismatch, DuplicateDeclaration, InvalidBounds,
// UnsupportedRank.
SymbolTable typecheck(const Program& p);

// Calls to names with this prefix go to routines resident in the runtime.
inline bool is_resident_name(const std::string& n) { return n.rfind("__", 0) == 0; }

}  // namespace relcheck::lang
