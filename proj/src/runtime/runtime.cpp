#include <filesystem>

#include "interpreter.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::runtime {

namespace {

std::mutex registry_mu;

std::map<std::string, ResidentFn>& registry() {
  static std::map<std::string, ResidentFn> r;
  return r;
}

// Pids are unique for the life of the host process, across runtimes.
std::atomic<int> next_pid{4001};

}  // namespace

void register_resident(const std::string& name, ResidentFn fn) {
  std::lock_guard<std::mutex> lk(registry_mu);
  registry()[name] = std::move(fn);
}

bool has_resident(const std::string& name) {
  std::lock_guard<std::mutex> lk(registry_mu);
  return registry().count(name) != 0;
}

ResidentFn find_resident(const std::string& name) {
  std::lock_guard<std::mutex> lk(registry_mu);
  auto it = registry().find(name);
  return it == registry().end() ? ResidentFn{} : it->second;
}

Runtime::~Runtime() {
  std::vector<std::unique_ptr<Process>> procs;
  {
    std::lock_guard<std::mutex> lk(mu_);
    procs.swap(procs_);
  }
  for (auto& p : procs) p->terminate();
  procs.clear();
}

Process& Runtime::launch_serial(const lang::Program& p, LaunchOptions opts) {
  if (p.form == lang::Form::Spmd)
    throw Error("RuntimeFault", "launch_serial given an SPMD program; use spawn_parallel");
  auto prog = std::make_shared<const lang::Program>(p);
  auto proc = std::make_unique<Process>(next_pid++, std::move(prog), std::move(opts), -1, 1, nullptr, "");
  std::lock_guard<std::mutex> lk(mu_);
  procs_.push_back(std::move(proc));
  return *procs_.back();
}

std::vector<Process*> Runtime::spawn_parallel(const lang::Program& p, int nranks, const std::string& contact_path,
                                              LaunchOptions opts) {
  if (nranks < 1) throw Error("InvalidRank", "nranks must be at least 1, got " + std::to_string(nranks));
  if (!contact_path.empty()) {
    std::error_code ec;
    std::filesystem::remove(contact_path, ec);
    if (ec) throw Error("SpawnFailure", "cannot remove stale contact file '" + contact_path + "': " + ec.message());
  }
  auto prog = std::make_shared<const lang::Program>(p);
  auto world = std::make_shared<World>(nranks);
  std::vector<Process*> out;
  {
    std::lock_guard<std::mutex> lk(mu_);
    for (int r = 0; r < nranks; ++r) {
      procs_.push_back(std::make_unique<Process>(next_pid++, prog, opts, r, nranks, world, contact_path));
      out.push_back(procs_.back().get());
    }
  }
  for (Process* proc : out) proc->start();
  return out;
}

Process* Runtime::find(int pid) {
  std::lock_guard<std::mutex> lk(mu_);
  for (auto& p : procs_)
    if (p->pid() == pid) return p.get();
  return nullptr;
}

Process& Runtime::process(int pid) {
  Process* p = find(pid);
  if (!p || p->state() == ProcState::Exited)
    throw Error("NoSuchPid", "no live process with pid " + std::to_string(pid));
  return *p;
}

std::vector<Process*> Runtime::processes() {
  std::lock_guard<std::mutex> lk(mu_);
  std::vector<Process*> out;
  for (auto& p : procs_) out.push_back(p.get());
  return out;
}

std::shared_ptr<World> Runtime::world_of(int pid) {
  Process* p = find(pid);
  if (!p) return nullptr;
  std::lock_guard<std::mutex> lk(mu_);
  return p->world_;
}

namespace {

// The root cause wins over faults it induced in other ranks.
int severity(const std::string& code) {
  if (code == "Terminated") return 0;
  if (code == "Deadlock") return 1;
  return 2;
}

RunResult collect(const std::vector<Process*>& procs) {
  RunResult out;
  int best = -1;
  for (Process* p : procs) {
    p->join();
    out.pids.push_back(p->pid());
    out.finals.push_back(p->final_state());
    if (p->faulted() && severity(p->fault_code()) > best) {
      best = severity(p->fault_code());
      out.faulted = true;
      out.fault_code = p->fault_code();
      out.fault_message = p->fault_message();
    }
  }
  return out;
}

}  // namespace

RunResult run_serial(Runtime& rt, const lang::Program& p, LaunchOptions opts) {
  opts.stop_at_entry = false;
  Process& proc = rt.launch_serial(p, std::move(opts));
  proc.start();
  return collect({&proc});
}

RunResult run_spmd(Runtime& rt, const lang::Program& p, int nranks, const std::string& contact_path,
                   LaunchOptions opts) {
  opts.stop_at_entry = false;
  return collect(rt.spawn_parallel(p, nranks, contact_path, std::move(opts)));
}

}  // namespace relcheck::runtime
