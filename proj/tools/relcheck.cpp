// relcheck: relative debugging of a serial program against its SPMD counterpart.

#include <CLI11.hpp>

#include <iostream>

#include "relcheck/cli/bench.hpp"
#include "relcheck/cli/session.hpp"
#include "relcheck/compare/compare.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"
#include "relcheck/probe/probe.hpp"
#include "relcheck/runtime/runtime.hpp"

using namespace relcheck;

namespace {

lang::Program load(const std::string& path) {
  lang::Program p = lang::parse_or_throw(cli::read_file(path));
  lang::typecheck(p);
  return p;
}

int cmd_run(cli::SessionConfig cfg, const std::string& mode, const std::vector<std::string>& monitors,
            const std::string& distribute, bool verbose) {
  cfg.mode.mode = compare::mode_from_string(mode);
  for (const auto& m : monitors) cfg.monitors.push_back(cli::MonitorSpec::parse(m));
  if (!distribute.empty()) cfg.distribute = cli::DistributeSpec::parse(distribute);
  cli::SessionOutcome o = cli::orchestrate(cfg);
  if (verbose)
    for (const auto& line : o.log) std::cerr << line << '\n';
  std::cout << cli::render_report(o, cfg.report_path);
  return o.exit_code();
}

int cmd_parallelize(const std::string& path, const std::string& distribute, int nranks, const std::vector<int>& drop,
                    const std::string& out, const std::string& db_path) {
  lang::Program p = load(path);
  auto d = cli::DistributeSpec::parse(distribute);
  auto defuse = depan::build_defuse(p);
  auto dist = partition::make_distribution(p, d.array, d.routine.empty() ? p.main().name : d.routine, d.dim, nranks);
  auto res = partition::parallelize(p, dist, defuse, drop);
  std::string text = lang::pretty_print(res.program);
  if (out.empty()) std::cout << text;
  else cli::write_file(out, text);
  if (!db_path.empty()) partition::write_db(res.db, db_path);
  return 0;
}

int cmd_exec(const std::string& path, int nranks) {
  lang::Program p = load(path);
  runtime::Runtime rt;
  runtime::RunResult r = p.form == lang::Form::Spmd ? runtime::run_spmd(rt, p, nranks, "")
                                                    : runtime::run_serial(rt, p);
  if (r.faulted) throw Error(r.fault_code, r.fault_message);
  for (std::size_t k = 0; k < r.finals.size(); ++k) {
    for (const auto& routine : p.routines) {
      if (!routine.result) continue;
      const ArrayValue* a = r.finals[k].array(routine.name, *routine.result);
      if (!a) continue;
      std::cout << (r.finals.size() > 1 ? "rank " + std::to_string(k) + " " : "") << *routine.result << "@"
                << routine.name << " (" << bounds_text(a->dims) << ") checksum " << compare::checksum(*a) << '\n';
    }
  }
  return 0;
}

// Launches `path` halted at entry and serves instrumentation commands from stdin.
int cmd_is(const std::string& path, const std::string& label) {
  probe::register_builtin_residents();
  lang::Program p = load(path);
  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.label = label;
  opts.stop_at_entry = true;
  runtime::Process& proc = rt.launch_serial(p, opts);
  proc.start();
  std::cout << "launched " << label << " pid " << proc.pid() << std::endl;
  probe::InstrumentationServer is(rt);
  is.serve(std::cin, std::cout);
  // Left halted by the session: release it so it can finish.
  if (auto who = proc.attached_by()) proc.detach(*who);
  if (proc.state() == runtime::ProcState::Stopped || proc.state() == runtime::ProcState::Created) proc.continue_();
  proc.join();
  if (proc.faulted()) throw Error(proc.fault_code(), proc.fault_message());
  std::cout << "exited" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative debugging of serial programs and their parallelized counterparts"};
  app.require_subcommand(1);

  cli::SessionConfig cfg;
  std::string mode = "element", distribute;
  std::vector<std::string> monitors;
  std::string parallel, db, report, log;
  bool verbose = false;
  std::uint64_t seed = 0;
  double timeout_s = 60;
  auto* run = app.add_subcommand("run", "Compare a serial run against its parallel counterpart");
  run->add_option("--serial", cfg.serial_path, "Serial reference program")->required()->check(CLI::ExistingFile);
  run->add_option("--parallel", parallel, "Pre-parallelized SPMD program (needs --db)")->check(CLI::ExistingFile);
  run->add_option("--distribute", distribute, "Parallelize internally: array[@routine][:dimN]");
  run->add_option("--ranks", cfg.nranks, "Number of ranks")->check(CLI::PositiveNumber);
  run->add_option("--drop-edge", cfg.drop_edges, "Dependence edge id to ignore (repeatable)");
  run->add_option("--monitor", monitors, "array@routine to monitor (repeatable)")->required();
  run->add_option("--mode", mode, "global | partial | element")->check(CLI::IsMember({"global", "partial", "element"}));
  run->add_option("--tolerance", cfg.mode.tolerance, "Absolute tolerance")->check(CLI::NonNegativeNumber);
  run->add_flag("--relative", cfg.mode.relative, "Scale the tolerance by the serial magnitude");
  run->add_option("--db", db, "Parallelization database (read with --parallel, written otherwise)");
  run->add_option("--report", report, "Write the divergence report JSON here");
  run->add_option("--log", log, "Write the orchestration log (JSON lines) here");
  run->add_option("--contact", cfg.contact_path, "Contact file path");
  run->add_option("--seed", seed, "Scheduler jitter seed");
  run->add_option("--timeout", timeout_s, "Session time limit in seconds");
  run->add_flag("-v,--verbose", verbose, "Print the orchestration log to stderr");

  std::string path;
  auto* analyze = app.add_subcommand("analyze", "Print dependence edges with their ids");
  analyze->add_option("source", path)->required()->check(CLI::ExistingFile);

  std::string pdist, out, pdb;
  int pranks = 1;
  std::vector<int> pdrop;
  auto* par = app.add_subcommand("parallelize", "Emit the SPMD program and its database");
  par->add_option("source", path)->required()->check(CLI::ExistingFile);
  par->add_option("--distribute", pdist, "array[@routine][:dimN]")->required();
  par->add_option("--ranks", pranks)->check(CLI::PositiveNumber);
  par->add_option("--drop-edge", pdrop, "Dependence edge id to ignore (repeatable)");
  par->add_option("-o,--output", out, "SPMD source path (default stdout)");
  par->add_option("--db", pdb, "Database path");

  int eranks = 1;
  auto* exec = app.add_subcommand("exec", "Run a program and print checksums of its result arrays");
  exec->add_option("source", path)->required()->check(CLI::ExistingFile);
  exec->add_option("--ranks", eranks)->check(CLI::PositiveNumber);

  std::string label = "a.out";
  auto* is = app.add_subcommand("is", "Instrumentation server over stdin for one halted program");
  is->add_option("source", path)->required()->check(CLI::ExistingFile);
  is->add_option("--label", label);

  cli::BenchOptions bopts;
  auto* bench = app.add_subcommand("bench", "Time the instrumentation methods");
  bench->add_option("--reps", bopts.reps)->check(CLI::PositiveNumber);
  bench->add_option("--iterations", bopts.iterations)->check(CLI::PositiveNumber);
  bench->add_option("--large", bopts.large)->check(CLI::PositiveNumber);
  bench->add_option("--small", bopts.small)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!parallel.empty()) cfg.parallel_path = parallel;
      if (!db.empty()) cfg.db_path = db;
      if (!report.empty()) cfg.report_path = report;
      if (!log.empty()) cfg.log_path = log;
      if (run->count("--seed")) cfg.sched_seed = seed;
      cfg.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
      return cmd_run(cfg, mode, monitors, distribute, verbose);
    }
    if (*analyze) {
      lang::Program p = load(path);
      std::cout << depan::describe_edges(p, depan::build_defuse(p));
      return 0;
    }
    if (*par) return cmd_parallelize(path, pdist, pranks, pdrop, out, pdb);
    if (*exec) return cmd_exec(path, eranks);
    if (*is) return cmd_is(path, label);
    if (*bench) {
      std::cout << cli::bench_table(cli::bench(bopts));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
