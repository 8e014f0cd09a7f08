#include "relcheck/cli/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

#include "relcheck/compare/compare.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/probe/probe.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::cli {

namespace {

// Stand-in for the comparing side: every checksum is handed over and the
// caller waits for the verdict, as a comparison routine does with its partner.
class Agent {
 public:
  Agent() : thread_([this] { loop(); }) {}
  ~Agent() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }

  void compare(double checksum) {
    std::unique_lock<std::mutex> lk(mu_);
    pending_ = checksum;
    cv_.notify_all();
    cv_.wait(lk, [&] { return !pending_; });
  }

 private:
  void loop() {
    std::unique_lock<std::mutex> lk(mu_);
    for (;;) {
      cv_.wait(lk, [&] { return pending_ || done_; });
      if (pending_) {
        total_ += *pending_;
        pending_.reset();
        cv_.notify_all();
      } else if (done_) {
        return;
      }
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::optional<double> pending_;
  double total_ = 0.0;
  bool done_ = false;
  std::thread thread_;
};

std::atomic<Agent*> agent{nullptr};

void checksum_resident(runtime::ResidentCall& rc) {
  if (rc.args.empty() || !rc.args[0].array) throw Error("BadArgPosition", "__checksum needs an array");
  agent.load()->compare(compare::checksum(*rc.args[0].array));
}

void register_checksum() {
  static std::once_flag once;
  std::call_once(once, [] { runtime::register_resident("__checksum", checksum_resident); });
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

[[noreturn]] void failed(runtime::Process& p) {
  throw Error(p.fault_code(), "bench workload failed: " + p.fault_message());
}

}  // namespace

std::string bench_program(long n, long span, int passes, int iterations, bool compiled_in) {
  // Work per call is about passes * span element updates whatever the array size.
  long m = std::max(1L, std::min(n, span));
  long sweeps = passes * std::max(1L, span / m);
  std::string s;
  s += "parameter (n = " + std::to_string(n) + ", m = " + std::to_string(m) +
       ", passes = " + std::to_string(sweeps) +
       ", iters = " + std::to_string(iterations) + ")\n\n";
  s += "program bench\n  real*8 a(n)\n  integer it\n  do it = 1, iters\n    call work(a)\n  end do\nend program bench\n\n";
  s += "subroutine work(a)\n  real*8 a(n)\n  integer i, k\n";
  if (compiled_in) s += "  call __checksum(a)\n";
  s += "  do k = 1, passes\n    do i = 1, m\n      a(i) = a(i) * 0.5 + 1.0\n    end do\n  end do\n";
  if (compiled_in) s += "  call __checksum(a)\n";
  s += "  return\nend subroutine work\n";
  return s;
}

double time_method(const std::string& method, long n, long span, int passes, int iterations) {
  register_checksum();
  lang::Program p = lang::parse_or_throw(bench_program(n, span, passes, iterations, method == "compiled-in"));
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  Agent comparer;
  agent = &comparer;
  auto t0 = std::chrono::steady_clock::now();
  if (method == "none" || method == "compiled-in") {
    runtime::Process& proc = rt.launch_serial(p, opts);
    proc.start();
    proc.join();
    if (proc.faulted()) failed(proc);
  } else if (method == "patched") {
    // Calls patched in once; no controller involvement per checkpoint.
    opts.stop_at_entry = true;
    runtime::Process& proc = rt.launch_serial(p, opts);
    proc.start();
    probe::InstrumentationServer is(rt);
    std::string pid = std::to_string(proc.pid());
    for (const std::string& cmd : {"attach a.out " + pid, "createPoint " + pid + " work entry",
                                   "insertCall " + pid + " __checksum 1", "createPoint " + pid + " work exit",
                                   "insertCall " + pid + " __checksum 1", "detach " + pid}) {
      std::string r = is.handle_command(cmd);
      if (r.rfind("ok", 0) != 0) throw Error("InstrumentationError", cmd + ": " + r);
    }
    proc.join();
    if (proc.faulted()) failed(proc);
  } else if (method == "trap") {
    // A controller round trip on every checkpoint: stop, read the array, continue.
    opts.breakpoints = {{"work", runtime::Site::Entry}, {"work", runtime::Site::Exit}};
    runtime::Process& proc = rt.launch_serial(p, opts);
    proc.attach("controller");
    proc.start();
    for (;;) {
      auto ev = proc.wait_event();
      if (ev->kind == runtime::Event::Kind::Exited) break;
      if (ev->kind != runtime::Event::Kind::Breakpoint) continue;
      runtime::MemValue v = proc.read_mem("controller", "work", "a");
      comparer.compare(compare::checksum(v.array));
      proc.continue_();
    }
    proc.join();
    if (proc.faulted()) failed(proc);
  } else {
    throw Error("ConfigError", "unknown bench method '" + method + "'");
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<BenchRow> bench(const BenchOptions& o) {
  static const char* methods[] = {"none", "compiled-in", "patched", "trap"};
  std::vector<BenchRow> rows;
  for (const char* size : {"large", "small"}) {
    for (const char* work : {"heavy", "light"}) {
      long n = std::string(size) == "large" ? o.large : o.small;
      bool heavy = std::string(work) == "heavy";
      int passes = heavy ? o.heavy_passes : o.light_passes;
      int iters = heavy ? std::max(1, o.iterations / 4) : o.iterations;
      std::vector<std::vector<double>> t(4);
      for (int r = 0; r < std::max(1, o.reps); ++r)
        for (int m = 0; m < 4; ++m) t[m].push_back(time_method(methods[m], n, o.span, passes, iters));
      rows.push_back({size, work, median(t[0]), median(t[1]), median(t[2]), median(t[3])});
    }
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string s = "test      size   work     none  compiled-in  patched     trap\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "checksum  %-5s  %-5s %8.3f %12.3f %8.3f %8.3f\n", r.size.c_str(), r.work.c_str(),
                  r.none, r.compiled, r.patched, r.trap);
    s += buf;
  }
  return s;
}

}  // namespace relcheck::cli
