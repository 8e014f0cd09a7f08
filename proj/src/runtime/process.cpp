#include <fstream>

#include "interpreter.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::runtime {

namespace {

std::mutex contact_mu;

[[noreturn]] void no_such_pid(int pid) {
  throw Error("NoSuchPid", "no live process with pid " + std::to_string(pid));
}

}  // namespace

Process::Process(int pid, std::shared_ptr<const lang::Program> program, LaunchOptions opts, int rank,
                 int nranks, std::shared_ptr<World> world, std::string contact_path)
    : pid_(pid),
      program_(std::move(program)),
      opts_(std::move(opts)),
      rank_(rank),
      nranks_(nranks),
      world_(std::move(world)),
      contact_path_(std::move(contact_path)) {
  interp_ = std::make_unique<Interpreter>(*this, *program_);
  for (const auto& bp : opts_.breakpoints) breakpoints_.insert(bp);
  has_breakpoints_ = !breakpoints_.empty();
  if (opts_.sched_seed) {
    jitter_ = true;
    jitter_state_ = *opts_.sched_seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(rank_ + 2) * 0xBF58476D1CE4E5B9ULL;
    if (jitter_state_ == 0) jitter_state_ = 1;
  }
}

Process::~Process() {
  terminate();
  if (thread_.joinable()) thread_.join();
}

ProcState Process::state() const {
  std::lock_guard<std::mutex> lk(mu_);
  return state_;
}

void Process::start() {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (state_ != ProcState::Created) return;
  state_ = ProcState::Running;
  thread_ = std::thread(&Process::run, this);
}

void Process::attach(const std::string& who) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (attached_)
    throw Error("AlreadyAttached", "pid " + std::to_string(pid_) + " is already attached by " + *attached_);
  attached_ = who;
}

void Process::detach(const std::string& who) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (!attached_ || *attached_ != who)
    throw Error("NotAttached", who + " is not attached to pid " + std::to_string(pid_));
  attached_.reset();
}

std::optional<std::string> Process::attached_by() const {
  std::lock_guard<std::mutex> lk(mu_);
  return attached_;
}

void Process::stop() {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (state_ != ProcState::Running) return;
  stop_req_ = true;
  flags_ = true;
}

void Process::continue_() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (state_ == ProcState::Exited) no_such_pid(pid_);
    if (state_ == ProcState::Stopped) {
      resume_ = true;
      cv_.notify_all();
      return;
    }
    if (state_ != ProcState::Created) return;
  }
  start();
}

void Process::terminate() {
  std::unique_lock<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) return;
  terminate_ = true;
  flags_ = true;
  if (state_ == ProcState::Created) {
    state_ = ProcState::Exited;
    faulted_ = true;
    fault_code_ = "Terminated";
    fault_message_ = "terminated before start";
    Event e;
    e.kind = Event::Kind::Exited;
    e.faulted = true;
    e.fault_code = fault_code_;
    e.fault_message = fault_message_;
    post(std::move(e));
    lk.unlock();
    if (world_) world_->rank_exited(rank_);
    return;
  }
  cv_.notify_all();
  lk.unlock();
  if (world_) world_->wake();
}

void Process::set_breakpoint(const Breakpoint& bp) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  breakpoints_.insert(bp);
  has_breakpoints_ = true;
}

void Process::clear_breakpoint(const Breakpoint& bp) {
  std::lock_guard<std::mutex> lk(mu_);
  breakpoints_.erase(bp);
  has_breakpoints_ = !breakpoints_.empty();
}

std::optional<Event> Process::wait_event(std::optional<std::chrono::milliseconds> timeout) {
  std::unique_lock<std::mutex> lk(mu_);
  auto ready = [&] { return !events_.empty(); };
  if (timeout) {
    if (!cv_.wait_for(lk, *timeout, ready)) return std::nullopt;
  } else {
    cv_.wait(lk, ready);
  }
  Event e = std::move(events_.front());
  events_.pop_front();
  return e;
}

void Process::join() {
  {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return state_ == ProcState::Exited || state_ == ProcState::Created; });
    if (state_ == ProcState::Created) return;
  }
  if (thread_.joinable() && std::this_thread::get_id() != thread_.get_id()) thread_.join();
}

MemValue Process::read_mem(const std::string& who, const std::string& routine, const std::string& var) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (!attached_ || *attached_ != who)
    throw Error("NotAttached", who + " is not attached to pid " + std::to_string(pid_));
  if (state_ != ProcState::Stopped)
    throw Error("NotStopped", "pid " + std::to_string(pid_) + " is " + to_string(state_));
  MemValue v;
  if (!interp_->read(routine, var, v))
    throw Error("UnknownVariable", "no variable '" + var + "' live in routine '" + routine + "'");
  if (v.is_array && rank_ >= 0 && opts_.distribution && opts_.distribution->covers(routine, var))
    v.owned = opts_.distribution->bounds(rank_);
  return v;
}

void Process::write_mem(const std::string& who, const std::string& routine, const std::string& var,
                        const MemValue& v) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (!attached_ || *attached_ != who)
    throw Error("NotAttached", who + " is not attached to pid " + std::to_string(pid_));
  if (state_ != ProcState::Stopped)
    throw Error("NotStopped", "pid " + std::to_string(pid_) + " is " + to_string(state_));
  if (!interp_->write(routine, var, v))
    throw Error("UnknownVariable", "no variable '" + var + "' live in routine '" + routine + "'");
}

int Process::create_point(const std::string& routine, Site site) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (state_ == ProcState::Running)
    throw Error("NotStopped", "pid " + std::to_string(pid_) + " must be stopped to instrument");
  if (!program_->find(routine)) throw Error("UnknownRoutine", "no routine named '" + routine + "'");
  InstrumentationPoint pt;
  pt.id = int(points_.size()) + 1;
  pt.routine = routine;
  pt.site = site;
  points_.push_back(pt);
  std::atomic_store(&points_snapshot_,
                    std::shared_ptr<const std::vector<InstrumentationPoint>>(
                        std::make_shared<std::vector<InstrumentationPoint>>(points_)));
  return pt.id;
}

void Process::insert_call(int point, InsertedCall call) {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ == ProcState::Exited) no_such_pid(pid_);
  if (state_ == ProcState::Running)
    throw Error("NotStopped", "pid " + std::to_string(pid_) + " must be stopped to instrument");
  if (point < 1 || point > int(points_.size()))
    throw Error("UnknownPoint", "no instrumentation point " + std::to_string(point));
  InstrumentationPoint& pt = points_[point - 1];
  const lang::Routine* r = program_->find(pt.routine);
  for (int pos : call.argpos)
    if (pos < 1 || pos > int(r->params.size()))
      throw Error("BadArgPosition", "routine '" + pt.routine + "' has " + std::to_string(r->params.size()) +
                                        " formal parameters, no position " + std::to_string(pos));
  if (const lang::Routine* target = program_->find(call.fn)) {
    if (target->params.size() != call.argpos.size())
      throw Error("BadArgPosition", "routine '" + call.fn + "' takes " + std::to_string(target->params.size()) +
                                        " arguments, " + std::to_string(call.argpos.size()) + " bound");
  } else if (!has_resident(call.fn)) {
    throw Error("UnknownRoutine", "no routine or resident named '" + call.fn + "'");
  }
  pt.calls.push_back(std::move(call));
  std::atomic_store(&points_snapshot_,
                    std::shared_ptr<const std::vector<InstrumentationPoint>>(
                        std::make_shared<std::vector<InstrumentationPoint>>(points_)));
}

std::vector<InstrumentationPoint> Process::points() const {
  std::lock_guard<std::mutex> lk(mu_);
  return points_;
}

int Process::last_point() const {
  std::lock_guard<std::mutex> lk(mu_);
  return int(points_.size());
}

const FinalState& Process::final_state() const {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ != ProcState::Exited)
    throw Error("NotExited", "pid " + std::to_string(pid_) + " has not exited");
  return final_;
}

bool Process::faulted() const {
  std::lock_guard<std::mutex> lk(mu_);
  return faulted_;
}

std::string Process::fault_code() const {
  std::lock_guard<std::mutex> lk(mu_);
  return fault_code_;
}

std::string Process::fault_message() const {
  std::lock_guard<std::mutex> lk(mu_);
  return fault_message_;
}

std::set<std::tuple<std::string, int, std::string>> Process::write_trace() const {
  std::lock_guard<std::mutex> lk(mu_);
  if (state_ != ProcState::Exited) return {};
  return interp_->trace;
}

void Process::post(Event e) {
  e.pid = pid_;
  events_.push_back(std::move(e));
  ++events_posted_;
  cv_.notify_all();
}

void Process::park(std::unique_lock<std::mutex>& lk) {
  // Any stop satisfies a pending stop request.
  stop_req_ = false;
  flags_ = terminate_.load();
  resume_ = false;
  cv_.wait(lk, [&] { return resume_ || terminate_.load(); });
  if (terminate_) throw Terminated{};
  state_ = ProcState::Running;
}

void Process::boundary() {
  if (jitter_) {
    jitter_state_ ^= jitter_state_ << 13;
    jitter_state_ ^= jitter_state_ >> 7;
    jitter_state_ ^= jitter_state_ << 17;
    if ((jitter_state_ & 15) == 0) std::this_thread::yield();
  }
  if (!flags_.load(std::memory_order_acquire)) return;
  std::unique_lock<std::mutex> lk(mu_);
  if (terminate_) throw Terminated{};
  if (stop_req_) {
    stop_req_ = false;
    flags_ = false;
    state_ = ProcState::Stopped;
    Event e;
    e.kind = Event::Kind::Stopped;
    std::string w = interp_->where();
    e.routine = w.substr(0, w.find(':'));
    post(std::move(e));
    park(lk);
  }
}

void Process::trap(const std::string& name, Site site, int invocation, const std::string& payload) {
  if (terminate_) throw Terminated{};
  if (!has_breakpoints_.load(std::memory_order_acquire)) return;
  std::unique_lock<std::mutex> lk(mu_);
  if (!breakpoints_.count({name, site})) return;
  state_ = ProcState::Stopped;
  Event e;
  e.kind = Event::Kind::Breakpoint;
  e.routine = name;
  e.site = site;
  e.invocation = invocation;
  e.payload = payload;
  post(std::move(e));
  park(lk);
}

void Process::run() {
  bool faulted = false;
  std::string code, message;
  try {
    if (!contact_path_.empty()) {
      std::lock_guard<std::mutex> lk(contact_mu);
      std::ofstream out(contact_path_, std::ios::app);
      out << rank_ << ' ' << pid_ << ' ' << opts_.label << '\n';
      out.flush();
      if (!out) throw Error("SpawnFailure", "cannot write contact file '" + contact_path_ + "'");
    }
    if (opts_.stop_at_entry) {
      std::unique_lock<std::mutex> lk(mu_);
      state_ = ProcState::Stopped;
      Event e;
      e.kind = Event::Kind::Stopped;
      e.routine = program_->main().name;
      post(std::move(e));
      park(lk);
    }
    interp_->run_main();
  } catch (const Terminated&) {
    faulted = true;
    code = "Terminated";
    message = "terminated by controller";
  } catch (const Error& e) {
    faulted = true;
    code = e.code();
    message = e.what();
  } catch (const std::exception& e) {
    faulted = true;
    code = "InternalError";
    message = e.what();
  }
  FinalState fs = interp_->final_state();
  if (world_) world_->rank_exited(rank_);
  std::lock_guard<std::mutex> lk(mu_);
  final_ = std::move(fs);
  faulted_ = faulted;
  fault_code_ = code;
  fault_message_ = message;
  state_ = ProcState::Exited;
  Event e;
  e.kind = Event::Kind::Exited;
  e.faulted = faulted;
  e.fault_code = code;
  e.fault_message = message;
  post(std::move(e));
}

}  // namespace relcheck::runtime
