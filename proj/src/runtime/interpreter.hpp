#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "relcheck/lang/ast.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::runtime {

// Thrown on the execution thread to unwind after terminate().
struct Terminated {};

struct CExpr {
  enum Op : std::uint8_t { ILit, RLit, LoadI, LoadR, Elem, Neg, Add, Sub, Mul, Div, Max, Min, MyRank, NRanks };
  Op op = ILit;
  bool is_int = true;
  int slot = -1;
  std::int64_t i = 0;
  double r = 0.0;
  std::vector<CExpr> kids;
};

struct CArg {
  enum Kind { Array, Ref, Value } kind = Value;
  int slot = -1;
  CExpr value;
};

struct CStmt {
  enum Op : std::uint8_t { AssignI, AssignR, AssignElem, Do, Call, Resident, Return, Send, Receive, Exchange, SetupPart };
  Op op = Return;
  int id = -1;
  int line = 0;
  int slot = -1;               // target / loop index / buffer array / setuppart lower
  int slot2 = -1;              // exchange send array / setuppart upper
  std::vector<CExpr> subs;     // target or buffer subscripts
  std::vector<CExpr> subs2;    // exchange send subscripts
  CExpr a, b, c;               // value | lower, upper, step | count, peer
  bool has_step = false;
  std::vector<CStmt> body;
  int callee = -1;
  std::string name;            // resident name
  std::vector<CArg> args;
  lang::Direction dir = lang::Direction::Left;
  int dim = 1;
};

struct VarInfo {
  std::string name;
  enum Kind { Int, Real, Array } kind = Real;
  std::vector<lang::Extent> dims;
  int formal = 0;  // 1-based, 0 for locals
};

struct CRoutine {
  std::string name;
  std::vector<VarInfo> vars;
  std::map<std::string, int> slot_of;
  std::vector<int> formal_slots;
  std::vector<CStmt> body;
};

struct Frame {
  const CRoutine* routine = nullptr;
  int index = -1;
  int invocation = 0;
  int line = 0;
  std::vector<Cell*> cells;
  std::vector<ArrayValue*> arrays;
  std::vector<std::shared_ptr<ArrayValue>> keep;
  std::vector<Cell> own;
};

class Interpreter {
 public:
  Interpreter(Process& proc, const lang::Program& p);

  void run_main();
  FinalState final_state() const;

  // `var` in the innermost live frame of `routine`, else in its last frame.
  // Only valid while the execution thread is parked.
  bool read(const std::string& routine, const std::string& var, MemValue& out) const;
  // Returns false for unknown variables; throws ShapeMismatch.
  bool write(const std::string& routine, const std::string& var, const MemValue& v);
  std::string where() const;  // "routine:line" of the innermost frame

  std::set<std::tuple<std::string, int, std::string>> trace;

 private:
  enum class Flow { Next, Return };

  struct LastFrame {
    std::map<std::string, std::shared_ptr<ArrayValue>> arrays;
    std::map<std::string, double> scalars;
  };

  CExpr compile_expr(const lang::Expr& e, const CRoutine& r, const lang::RoutineScope& scope);
  CStmt compile_stmt(const lang::Stmt& s, const CRoutine& r, const lang::RoutineScope& scope);

  std::int64_t eval_int(const CExpr& e, Frame& f);
  double eval_real(const CExpr& e, Frame& f);
  std::size_t element(const ArrayValue& a, const std::vector<CExpr>& subs, Frame& f, int slot);
  Flow exec_block(const std::vector<CStmt>& body, Frame& f);
  Flow exec(const CStmt& s, Frame& f);
  void call(int callee, const std::vector<CArg>& args, Frame& caller);
  void call_resident(const CStmt& s, Frame& f);
  void run_points(Frame& f, Site site);
  void exchange(const CStmt& s, Frame& f);
  [[noreturn]] void fault(Frame& f, const std::string& msg) const;

  Process& proc_;
  std::vector<CRoutine> routines_;
  int depth_ = 0;  // active user-routine calls
  std::map<std::string, int> index_of_;
  int main_ = -1;
  std::vector<int> invocations_;
  std::vector<Frame*> stack_;
  std::map<int, LastFrame> last_;
  bool trace_writes_ = false;
};

}  // namespace relcheck::runtime
