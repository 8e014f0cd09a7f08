#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "relcheck/array.hpp"
#include "relcheck/error.hpp"
#include "relcheck/lang/ast.hpp"
#include "relcheck/partition/distribution.hpp"

namespace relcheck::runtime {

enum class ProcState { Created, Running, Stopped, Exited };
enum class Site { Entry, Exit };

const char* to_string(ProcState s);
const char* to_string(Site s);
Site site_from_string(const std::string& s);  // "entry" | "exit"; throws BadSite

// Scalar storage; integer and real variables use the matching member.
struct Cell {
  double real = 0.0;
  std::int64_t integer = 0;
};

// Values of every variable as of the end of a run: arrays alias their final
// storage, scalars are the values at the routine's last exit.
struct FinalState {
  std::map<std::string, std::map<std::string, ArrayValue>> arrays;  // routine -> name -> value
  std::map<std::string, std::map<std::string, double>> scalars;

  const ArrayValue* array(const std::string& routine, const std::string& name) const;
  bool operator==(const FinalState&) const = default;
};

struct MemValue {
  bool is_array = false;
  lang::ScalarType type = lang::ScalarType::Real;
  double scalar = 0.0;
  ArrayValue array;
  // This rank's block of the distributed dimension, when the array is distributed.
  std::optional<std::pair<std::int64_t, std::int64_t>> owned;
};

class Process;

// Argument bound to a resident routine: a whole array or a scalar cell.
struct ResidentArg {
  std::string name;
  ArrayValue* array = nullptr;
  Cell* cell = nullptr;
  bool integer = false;
  double value() const;  // scalar value
};

struct ResidentCall {
  Process& process;
  std::string routine;  // instrumented (or calling) routine
  Site site;
  int invocation;  // 1-based per routine
  std::vector<ResidentArg> args;
  const std::map<std::string, std::string>& meta;

  // Metadata lookup falling back to the process defaults.
  std::optional<std::string> get(const std::string& key) const;
};

using ResidentFn = std::function<void(ResidentCall&)>;

// Routines resident in every process (called via `__name`); thread-safe.
void register_resident(const std::string& name, ResidentFn fn);
bool has_resident(const std::string& name);
ResidentFn find_resident(const std::string& name);

struct InsertedCall {
  std::string fn;
  std::vector<int> argpos;  // 1-based formal positions
  std::map<std::string, std::string> meta;
};

struct InstrumentationPoint {
  int id = 0;
  std::string routine;
  Site site = Site::Entry;
  std::vector<InsertedCall> calls;
};

struct Event {
  enum class Kind { Stopped, Breakpoint, Exited };
  Kind kind = Kind::Stopped;
  int pid = 0;
  std::string routine;
  Site site = Site::Entry;
  int invocation = 0;
  std::string payload;  // Breakpoint: data handed to the trap
  bool faulted = false;
  std::string fault_code;
  std::string fault_message;
};

struct Breakpoint {
  std::string routine;  // user routine or resident name
  Site site = Site::Entry;
  auto operator<=>(const Breakpoint&) const = default;
};

struct LaunchOptions {
  std::string label = "a.out";
  bool stop_at_entry = false;
  std::vector<Breakpoint> breakpoints;
  std::optional<std::uint64_t> sched_seed;  // random yields at statement boundaries
  bool trace_writes = false;
  std::optional<partition::DistributionSpec> distribution;
  std::map<std::string, std::string> resident_defaults;
};

class World;
class Interpreter;

// One serial program or one SPMD rank, executing on its own thread.
class Process {
 public:
  Process(int pid, std::shared_ptr<const lang::Program> program, LaunchOptions opts, int rank,
          int nranks, std::shared_ptr<World> world, std::string contact_path);
  ~Process();
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  int pid() const { return pid_; }
  int rank() const { return rank_; }  // -1 for a serial process
  int nranks() const { return nranks_; }
  const std::string& label() const { return opts_.label; }
  const LaunchOptions& options() const { return opts_; }
  const lang::Program& program() const { return *program_; }
  ProcState state() const;

  // Created -> Running.
  void start();
  void attach(const std::string& who);  // AlreadyAttached
  void detach(const std::string& who);  // NotAttached
  std::optional<std::string> attached_by() const;

  void stop();       // honoured at the next statement boundary
  void continue_();  // Stopped -> Running (Created: starts)
  void terminate();  // -> Exited, cancelling blocked waits
  void set_breakpoint(const Breakpoint& bp);
  void clear_breakpoint(const Breakpoint& bp);

  // Next control event; nullopt on timeout.
  std::optional<Event> wait_event(std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  // Blocks until the process has exited.
  void join();

  // Caller must be attached and the process stopped.
  MemValue read_mem(const std::string& who, const std::string& routine, const std::string& var);
  void write_mem(const std::string& who, const std::string& routine, const std::string& var,
                 const MemValue& v);

  // Instrumentation; the process must not be running.
  int create_point(const std::string& routine, Site site);  // UnknownRoutine
  void insert_call(int point, InsertedCall call);            // UnknownPoint, BadArgPosition
  std::vector<InstrumentationPoint> points() const;
  int last_point() const;

  // Valid once exited.
  const FinalState& final_state() const;
  bool faulted() const;
  std::string fault_code() const;
  std::string fault_message() const;
  std::uint64_t events_posted() const { return events_posted_.load(); }
  // (routine, stmt id, array) for every array write, when trace_writes is set.
  std::set<std::tuple<std::string, int, std::string>> write_trace() const;

  // Called from the execution thread (interpreter and resident routines).
  void boundary();  // statement boundary: stop requests, termination, jitter
  // Stops with a Breakpoint event if a breakpoint matches.
  void trap(const std::string& name, Site site, int invocation, const std::string& payload);
  bool terminating() const { return terminate_.load(); }
  World* world() const { return world_.get(); }

 private:
  friend class Interpreter;
  friend class Runtime;
  void run();
  void post(Event e);
  void park(std::unique_lock<std::mutex>& lk);

  const int pid_;
  std::shared_ptr<const lang::Program> program_;
  LaunchOptions opts_;
  const int rank_;
  const int nranks_;
  std::shared_ptr<World> world_;
  std::string contact_path_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  ProcState state_ = ProcState::Created;
  std::optional<std::string> attached_;
  std::set<Breakpoint> breakpoints_;
  std::vector<InstrumentationPoint> points_;
  // Copy read lock-free by the execution thread; replaced on every change.
  std::shared_ptr<const std::vector<InstrumentationPoint>> points_snapshot_;
  std::deque<Event> events_;
  std::atomic<std::uint64_t> events_posted_{0};
  std::atomic<bool> stop_req_{false};
  std::atomic<bool> terminate_{false};
  std::atomic<bool> flags_{false};  // any of the above pending
  bool resume_ = false;

  std::unique_ptr<Interpreter> interp_;
  std::thread thread_;
  FinalState final_;
  bool faulted_ = false;
  std::string fault_code_;
  std::string fault_message_;
  std::atomic<bool> has_breakpoints_{false};
  bool jitter_ = false;
  std::uint64_t jitter_state_ = 0;
};

// Owns every process of a session and hands out unique pids.
class Runtime {
 public:
  Runtime() = default;
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  // Serial program, created (not started). Throws RuntimeFault on an SPMD program.
  Process& launch_serial(const lang::Program& p, LaunchOptions opts = {});
  // SPMD ranks, started; each appends `rank pid label` to contact_path before
  // running user code. A stale contact file is removed first.
  std::vector<Process*> spawn_parallel(const lang::Program& p, int nranks, const std::string& contact_path,
                                       LaunchOptions opts = {});

  // Throws NoSuchPid for unknown or exited pids.
  Process& process(int pid);
  Process* find(int pid);
  std::vector<Process*> processes();
  // World shared by the ranks of `pid`, if any.
  std::shared_ptr<World> world_of(int pid);

 private:
  std::mutex mu_;
  std::vector<std::unique_ptr<Process>> procs_;
};

// Messaging between the ranks of one SPMD launch: buffered sends, FIFO per
// (sender, receiver), global deadlock detection.
class World {
 public:
  explicit World(int nranks);

  int nranks() const { return nranks_; }
  void send(int src, int dst, std::vector<double> data);
  std::vector<double> receive(Process& self, int src, std::size_t count, const std::string& where);
  void rank_exited(int rank);
  void wake();  // re-evaluate waits after termination requests
  // Messages still queued after every rank exited.
  std::size_t residual() const;
  std::string deadlock_report() const;

 private:
  void detect_locked();

  const int nranks_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::pair<int, int>, std::deque<std::vector<double>>> channels_;
  std::vector<int> blocked_src_;  // -1 when not blocked
  std::vector<std::string> blocked_where_;
  std::vector<bool> exited_;
  std::string deadlock_;
};

// Convenience: run to completion (no control) and return the final state.
struct RunResult {
  std::vector<int> pids;
  std::vector<FinalState> finals;  // one per process (rank order)
  bool faulted = false;
  std::string fault_code;
  std::string fault_message;
};
RunResult run_serial(Runtime& rt, const lang::Program& p, LaunchOptions opts = {});
RunResult run_spmd(Runtime& rt, const lang::Program& p, int nranks, const std::string& contact_path,
                   LaunchOptions opts = {});

}  // namespace relcheck::runtime
