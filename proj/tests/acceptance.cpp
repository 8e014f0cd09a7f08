// Acceptance suite: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.

#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "relcheck/cli/bench.hpp"
#include "relcheck/cli/session.hpp"
#include "relcheck/compare/compare.hpp"
#include "relcheck/compare/report.hpp"
#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"
#include "relcheck/probe/probe.hpp"
#include "relcheck/runtime/runtime.hpp"

using namespace relcheck;
using nlohmann::json;

namespace {

const std::string kSrc = RELCHECK_SOURCE_DIR;
const std::string kBin = RELCHECK_BIN;

struct Failure {
  std::string what;
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw Failure{what};
}

std::string path(const std::string& rel) { return kSrc + "/" + rel; }

lang::Program load(const std::string& rel) {
  lang::Program p = lang::parse_or_throw(cli::read_file(path(rel)));
  lang::typecheck(p);
  return p;
}

// Runs a shell command; returns (exit status, stdout).
std::pair<int, std::string> shell(const std::string& cmd) {
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) throw Failure{"cannot run " + cmd};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, f)) out.append(buf, n);
  int st = pclose(f);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

cli::SessionConfig jacobi_session(compare::Mode mode, double tol) {
  cli::SessionConfig cfg;
  cfg.serial_path = path("programs/jacobi.mf");
  cfg.distribute = cli::DistributeSpec::parse("phi2@jacobi:dim1");
  cfg.nranks = 4;
  cfg.monitors = {cli::MonitorSpec::parse("phi2@jacobi")};
  cfg.mode.mode = mode;
  cfg.mode.tolerance = tol;
  return cfg;
}

// Id of the flow edge from the oldphi8 copy to the oldphi8(i+1,j) read.
int jacobi_bug_edge() {
  lang::Program p = load("programs/jacobi.mf");
  depan::DefUseDB db = depan::build_defuse(p);
  std::vector<int> ids;
  for (const auto& e : db.edges) {
    if (e.kind != depan::DepKind::Flow || e.source.var != "oldphi8" || e.sink.var != "oldphi8") continue;
    if (e.source.routine != "update" || e.sink.subscripts.size() != 2) continue;
    const auto& s = e.sink.subscripts;
    if (s[0] && s[0]->var == "i" && s[0]->offset == 1 && s[1] && s[1]->var == "j" && s[1]->offset == 0)
      ids.push_back(e.id);
  }
  expect(ids.size() == 1, "expected one oldphi8 -> oldphi8(i+1,j) flow edge, found " + std::to_string(ids.size()));
  return ids[0];
}

cli::SessionConfig jacobi_bug(compare::Mode mode, double tol) {
  cli::SessionConfig cfg = jacobi_session(mode, tol);
  cfg.drop_edges = {jacobi_bug_edge()};
  return cfg;
}

const auto& stmts_of(const lang::Program& p, const std::string& routine) {
  const lang::Routine* r = p.find(routine);
  expect(r != nullptr, "no routine " + routine);
  return r->body;
}

template <class T>
int count_stmts(const lang::Program& p) {
  int n = 0;
  for (const auto& r : p.routines)
    lang::for_each_stmt(r.body, [&](const lang::Stmt& s) { n += std::holds_alternative<T>(s.node); });
  return n;
}

bool is_intrinsic(const lang::Expr& e, lang::Intrinsic fn) {
  const auto* c = std::get_if<lang::IntrinsicCall>(&e.node);
  return c && c->fn == fn;
}

// --- 1 -----------------------------------------------------------------------

void golden_transformation() {
  auto [status, out] = shell(kBin + " parallelize " + path("programs/fig1.mf") + " --distribute u@main:dim1 --ranks 4");
  expect(status == 0, "parallelize exited " + std::to_string(status));
  lang::Program got = lang::parse_or_throw(out);
  lang::Program golden = lang::parse_or_throw(cli::read_file(path("tests/golden/fig1_spmd.mf")));
  expect(got == golden, "SPMD output differs from the golden file:\n" + out);

  // Shape of the rewritten stencil routine.
  const auto& body = stmts_of(got, "loop");
  std::vector<const lang::DoLoop*> loops;
  for (const auto& s : body)
    if (const auto* l = std::get_if<lang::DoLoop>(&s.node)) loops.push_back(l);
  expect(loops.size() == 4, "loop routine should hold init, two exchange loops and the stencil");
  auto clamped = [](const lang::DoLoop* l) {
    return is_intrinsic(l->lower, lang::Intrinsic::Max) && is_intrinsic(l->upper, lang::Intrinsic::Min);
  };
  auto exchange_dir = [](const lang::DoLoop* l) -> std::optional<lang::Direction> {
    if (l->body.size() != 1) return std::nullopt;
    const auto* x = std::get_if<lang::Exchange>(&l->body[0].node);
    return x ? std::optional(x->dir) : std::nullopt;
  };
  expect(clamped(loops[0]), "init loop bounds are not clamped");
  expect(exchange_dir(loops[1]) == lang::Direction::Right, "first exchange loop is not RIGHT");
  expect(exchange_dir(loops[2]) == lang::Direction::Left, "second exchange loop is not LEFT");
  expect(clamped(loops[3]), "stencil loop bounds are not clamped");
}

// --- 2 -----------------------------------------------------------------------

partition::ParallelizeResult parallelize_a(const lang::Program& p) {
  auto db = depan::build_defuse(p);
  auto dist = partition::make_distribution(p, "a", "main", 1, 4);
  return partition::parallelize(p, dist, db, {});
}

void triptych() {
  {
    auto res = parallelize_a(load("programs/triptych_local.mf"));
    int comm = count_stmts<lang::Exchange>(res.program) + count_stmts<lang::Send>(res.program) +
               count_stmts<lang::Receive>(res.program);
    expect(comm == 0, "local loop generated " + std::to_string(comm) + " communication statements");
  }
  {
    lang::Program serial = load("programs/triptych_shift.mf");
    auto res = parallelize_a(serial);
    expect(count_stmts<lang::Send>(res.program) + count_stmts<lang::Receive>(res.program) == 0,
           "shift loop uses point-to-point messages");
    std::vector<const lang::Exchange*> xs;
    std::string lower, upper;
    lang::for_each_stmt(stmts_of(res.program, "main"), [&](const lang::Stmt& s) {
      if (const auto* x = std::get_if<lang::Exchange>(&s.node)) xs.push_back(x);
      if (const auto* sp = std::get_if<lang::SetupPart>(&s.node)) lower = sp->lower_var, upper = sp->upper_var;
    });
    expect(xs.size() == 1, "shift loop should need exactly one exchange, got " + std::to_string(xs.size()));
    const lang::Exchange& x = *xs[0];
    expect(x.dir == lang::Direction::Left, "shift exchange is not LEFT");
    expect(lang::print_expr(x.recv) == "b(" + lower + " - 1)", "left halo lands at " + lang::print_expr(x.recv));
    expect(lang::print_expr(x.send) == "b(" + upper + ")", "upper boundary is not sent: " + lang::print_expr(x.send));
    expect(lang::print_expr(x.count) == "1", "halo width is not 1");

    // The generated program computes the serial values.
    runtime::Runtime rt;
    auto s = runtime::run_serial(rt, serial);
    auto p = runtime::run_spmd(rt, res.program, 4, "");
    expect(!s.faulted && !p.faulted, "triptych run faulted");
    auto dist = partition::make_distribution(serial, "a", "main", 1, 4);
    std::vector<compare::Contribution> parts;
    for (int r = 0; r < 4; ++r) parts.push_back(compare::contribute(*p.finals[r].array("main", "a"), dist, r, true));
    expect(compare::bit_equal(compare::reassemble(parts, dist), *s.finals[0].array("main", "a")),
           "SPMD shift result differs from serial");
  }
  {
    lang::Program p = load("programs/triptych_recurrence.mf");
    auto db = depan::build_defuse(p);
    int expected = -1;
    for (const auto& e : db.edges)
      if (e.kind == depan::DepKind::Flow && e.source.var == "a" && e.sink.var == "a" && e.loop_carried &&
          e.distance == 1)
        expected = e.id;
    expect(expected >= 0, "no distance-1 flow edge on a");
    try {
      parallelize_a(p);
      throw Failure{"recurrence was parallelized"};
    } catch (const partition::NotParallelizable& e) {
      expect(e.edge() == expected, "NotParallelizable names edge " + std::to_string(e.edge()) + ", expected " +
                                       std::to_string(expected));
      expect(std::string(e.what()).find("#" + std::to_string(expected)) != std::string::npos,
             "message does not name the edge: " + std::string(e.what()));
    }
  }
}

// --- 3 -----------------------------------------------------------------------

std::vector<std::string> last_log;

void reassembly_identity(const cli::SessionOutcome& o) {
  int compared = 0;
  for (const auto& dist : o.db.distributions) {
    for (const auto& aa : dist.alignment) {
      const ArrayValue* serial = o.serial_final.array(aa.routine, aa.array);
      if (!serial) continue;
      std::vector<compare::Contribution> parts;
      for (int r = 0; r < dist.nranks; ++r) {
        const ArrayValue* local = o.rank_finals.at(r).array(aa.routine, aa.array);
        expect(local != nullptr, "rank " + std::to_string(r) + " has no " + aa.array + "@" + aa.routine);
        parts.push_back(compare::contribute(*local, dist, r, true));
      }
      expect(compare::bit_equal(compare::reassemble(parts, dist), *serial),
             aa.array + "@" + aa.routine + " does not reassemble to the serial final");
      ++compared;
    }
  }
  expect(compared > 0, "no distributed arrays compared");
}

void correct_run() {
  for (auto mode : {compare::Mode::GlobalChecksum, compare::Mode::PartialChecksum, compare::Mode::ElementWise}) {
    cli::SessionOutcome o = cli::orchestrate(jacobi_session(mode, 1e-12));
    std::string tag = std::string(compare::to_string(mode)) + ": ";
    expect(o.kind == cli::OutcomeKind::NoDivergence, tag + cli::render_report(o));
    expect(o.checkpoints == 402, tag + "checkpoints " + std::to_string(o.checkpoints));
    expect(o.exit_code() == 0, tag + "exit code " + std::to_string(o.exit_code()));
    reassembly_identity(o);
    if (mode == compare::Mode::ElementWise) last_log = o.log;
  }
}

// --- 4 -----------------------------------------------------------------------

// Plain re-implementation of the first update: serial values, and the values
// each rank computes when its right halo of oldphi8 is never filled.
struct Grid {
  static constexpr int n = 44;
  std::vector<double> v = std::vector<double>(n * n, 0.0);
  double& operator()(int i, int j) { return v[i + n * j]; }
};

std::map<std::pair<long, long>, std::pair<double, double>> halo_oracle(int nranks) {
  Grid phi;
  for (int j = 1; j <= 42; ++j)
    for (int i = 1; i <= 42; ++i) phi(i, j) = 1.0;
  auto stencil = [](Grid& g, int i, int j) {
    return 0.25 * (g(i - 1, j) + g(i + 1, j) + g(i, j - 1) + g(i, j + 1));
  };
  Grid serial_old = phi, serial = phi;
  for (int j = 1; j <= 42; ++j)
    for (int i = 1; i <= 42; ++i) serial(i, j) = stencil(serial_old, i, j);

  std::vector<Grid> local(nranks);
  std::vector<std::pair<std::int64_t, std::int64_t>> blk(nranks);
  for (int r = 0; r < nranks; ++r) {
    blk[r] = partition::block_bounds(0, 43, nranks, r);
    for (int j = 0; j < Grid::n; ++j)
      for (auto i = blk[r].first; i <= blk[r].second; ++i) local[r](int(i), j) = phi(int(i), j);
  }
  // Only the left halo arrives: the neighbour's upper row.
  for (int r = 1; r < nranks; ++r)
    for (int j = 1; j <= 42; ++j) local[r](int(blk[r].first - 1), j) = local[r - 1](int(blk[r - 1].second), j);

  std::map<std::pair<long, long>, std::pair<double, double>> diffs;
  for (int r = 0; r < nranks; ++r)
    for (int j = 1; j <= 42; ++j)
      for (int i = std::max<int>(1, int(blk[r].first)); i <= std::min<int>(42, int(blk[r].second)); ++i) {
        double par = stencil(local[r], i, j);
        if (par != serial(i, j)) diffs[{i, j}] = {serial(i, j), par};
      }
  return diffs;
}

void bug_reproduction() {
  cli::SessionOutcome o = cli::orchestrate(jacobi_bug(compare::Mode::ElementWise, 0.0));
  expect(o.kind == cli::OutcomeKind::Divergence, "no divergence: " + cli::render_report(o));
  expect(o.exit_code() == 1, "exit code " + std::to_string(o.exit_code()));
  const auto& r = *o.report;
  expect(r.routine == "update" && r.site == "exit" && r.invocation == 1,
         "diverged at (" + r.routine + ", " + r.site + ", " + std::to_string(r.invocation) + ")");

  auto oracle = halo_oracle(4);
  std::set<long> rows;
  for (const auto& [ij, v] : oracle) rows.insert(ij.first);
  std::set<long> uppers;
  for (int k = 0; k < 3; ++k) uppers.insert(long(partition::block_bounds(0, 43, 4, k).second));
  expect(rows == uppers, "oracle rows disagree with block_bounds upper rows");

  expect(r.diffs.size() == oracle.size(),
         "reported " + std::to_string(r.diffs.size()) + " diffs, oracle " + std::to_string(oracle.size()));
  std::set<int> ranks;
  for (const auto& d : r.diffs) {
    auto it = oracle.find({long(d.index.at(0)), long(d.index.at(1))});
    expect(it != oracle.end(), "unexpected diff at (" + std::to_string(d.index[0]) + "," + std::to_string(d.index[1]) + ")");
    expect(d.serial == it->second.first && d.parallel == it->second.second, "diff values disagree with oracle");
    ranks.insert(d.rank);
  }
  expect(ranks == std::set<int>{0, 1, 2}, "failing ranks are not exactly 0, 1, 2");
}

// --- 5 -----------------------------------------------------------------------

void mode_sensitivity() {
  cli::SessionOutcome element = cli::orchestrate(jacobi_bug(compare::Mode::ElementWise, 0.0));
  expect(element.kind == cli::OutcomeKind::Divergence, "element mode found nothing");
  for (auto mode : {compare::Mode::GlobalChecksum, compare::Mode::PartialChecksum}) {
    cli::SessionOutcome o = cli::orchestrate(jacobi_bug(mode, 1e-9));
    std::string tag = std::string(compare::to_string(mode)) + ": ";
    expect(o.kind == cli::OutcomeKind::Divergence, tag + "no divergence");
    expect(o.checkpoints <= element.checkpoints, tag + "diverged later than the element comparison");
    expect(o.report->checksum_delta && *o.report->checksum_delta != 0.0, tag + "no checksum delta");
    if (mode == compare::Mode::PartialChecksum) {
      expect(o.report->failing_rank.has_value(), tag + "no failing rank");
      int fr = *o.report->failing_rank;
      expect(fr >= 0 && fr <= 2, tag + "failing rank " + std::to_string(fr));
    }
  }
}

// --- 6 -----------------------------------------------------------------------

void scatter_gather() {
  std::mt19937_64 rng(20241018);
  std::uniform_real_distribution<double> val(-1e3, 1e3);
  for (int len = 1; len <= 64; ++len) {
    for (int nranks = 1; nranks <= 8; ++nranks) {
      if (nranks > len) {
        bool threw = false;
        try {
          partition::block_bounds(0, len - 1, nranks, 0);
        } catch (const Error& e) {
          threw = e.code() == "InvalidRank";
        }
        expect(threw, "more ranks than elements accepted");
        continue;
      }
      // Block invariants: contiguous cover in rank order, sizes within one.
      std::int64_t lo = 3 - len / 2, hi = lo + len - 1, next = lo;
      std::int64_t smin = len, smax = 0;
      for (int r = 0; r < nranks; ++r) {
        auto [l, h] = partition::block_bounds(lo, hi, nranks, r);
        expect(l == next && h >= l, "blocks are not disjoint and contiguous");
        smin = std::min(smin, h - l + 1);
        smax = std::max(smax, h - l + 1);
        next = h + 1;
      }
      expect(next == hi + 1, "blocks do not cover the range");
      expect(smax - smin <= 1, "block sizes differ by more than one");

      // reassemble(scatter(x)) == x along either dimension of a 2-D array.
      for (int dim = 1; dim <= 2; ++dim) {
        std::vector<lang::Extent> dims = {{lo, hi}, {-1, 2}};
        if (dim == 2) std::swap(dims[0], dims[1]);
        ArrayValue a(dims);
        for (double& x : a.data) x = val(rng);
        partition::DistributionSpec d;
        d.dim = dim;
        d.lo = lo;
        d.hi = hi;
        d.nranks = nranks;
        auto parts = compare::scatter(a, d);
        std::shuffle(parts.begin(), parts.end(), rng);
        expect(compare::bit_equal(compare::reassemble(parts, d), a), "reassemble(scatter(x)) != x");
      }
    }
  }
}

// --- 7 -----------------------------------------------------------------------

void checksum_additivity() {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    int rank = 1 + int(rng() % 3);
    std::vector<lang::Extent> dims;
    for (int k = 0; k < rank; ++k) {
      std::int64_t lo = std::int64_t(rng() % 5) - 2;
      dims.push_back({lo, lo + std::int64_t(rng() % 20)});
    }
    ArrayValue a(dims);
    double scale = std::pow(10.0, double(rng() % 12) - 4);
    std::uniform_real_distribution<double> val(-scale, scale);
    for (double& x : a.data) x = val(rng);
    partition::DistributionSpec d;
    d.dim = 1 + int(rng() % rank);
    d.lo = dims[d.dim - 1].lo;
    d.hi = dims[d.dim - 1].hi;
    d.nranks = 1 + int(rng() % std::min<std::int64_t>(8, d.hi - d.lo + 1));
    double global = compare::checksum(a), sum = 0.0;
    for (int r = 0; r < d.nranks; ++r) sum += compare::contribute(a, d, r, false).checksum;
    expect(std::abs(sum - global) <= 1e-9 * (1 + std::abs(global)),
           "trial " + std::to_string(t) + ": partial sum " + std::to_string(sum) + " vs " + std::to_string(global));
  }
}

// --- 8 -----------------------------------------------------------------------

void same_state(const runtime::FinalState& a, const runtime::FinalState& b, const std::string& who) {
  expect(a.arrays.size() == b.arrays.size(), who + ": routine sets differ");
  for (const auto& [routine, arrays] : a.arrays) {
    auto it = b.arrays.find(routine);
    expect(it != b.arrays.end() && it->second.size() == arrays.size(), who + ": arrays of " + routine + " differ");
    for (const auto& [name, v] : arrays) {
      auto jt = it->second.find(name);
      expect(jt != it->second.end() && compare::bit_equal(v, jt->second), who + ": " + name + "@" + routine + " differs");
    }
  }
  expect(a.scalars == b.scalars, who + ": scalars differ");
}

void probe_transparency() {
  cli::SessionOutcome o = cli::orchestrate(jacobi_session(compare::Mode::ElementWise, 0.0));
  expect(o.kind == cli::OutcomeKind::NoDivergence, "instrumented run diverged");
  expect(o.instrumented.size() >= 3, "instrumentation covered only " + std::to_string(o.instrumented.size()) + " targets");

  runtime::Runtime rt;
  auto serial = runtime::run_serial(rt, load("programs/jacobi.mf"));
  lang::Program spmd = lang::parse_or_throw(o.spmd_source);
  lang::typecheck(spmd);
  auto par = runtime::run_spmd(rt, spmd, 4, "");
  expect(!serial.faulted && !par.faulted, "plain run faulted");
  same_state(o.serial_final, serial.finals[0], "serial");
  for (int r = 0; r < 4; ++r) same_state(o.rank_finals.at(r), par.finals.at(r), "rank " + std::to_string(r));
}

// --- 9 -----------------------------------------------------------------------

void determinism() {
  std::string first;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cli::SessionConfig cfg = jacobi_bug(compare::Mode::ElementWise, 0.0);
    cfg.sched_seed = seed * 0x9e3779b97f4a7c15ULL;
    cli::SessionOutcome o = cli::orchestrate(cfg);
    expect(o.report.has_value(), "seed " + std::to_string(seed) + ": no report");
    std::string text = compare::report_text(*o.report);
    if (seed == 1) first = text;
    expect(text == first, "seed " + std::to_string(seed) + " produced a different report");
  }
}

// --- 10 ----------------------------------------------------------------------

void is_protocol() {
  probe::register_builtin_residents();
  probe::reset_counts();
  lang::Program p = load("tests/data/is_count.mf");
  const int calls = 7;

  runtime::Runtime rt;
  runtime::LaunchOptions opts;
  opts.stop_at_entry = true;
  runtime::Process& proc = rt.launch_serial(p, opts);
  proc.start();
  probe::InstrumentationServer is(rt);
  std::string pid = std::to_string(proc.pid());

  for (const std::string& cmd : {"attach a.out " + pid, "createPoint " + pid + " sub2", "insertCall " + pid + " sub1 2 3"}) {
    std::string r = is.handle_command(cmd);
    expect(r.rfind("ok", 0) == 0, cmd + " -> " + r);
  }
  std::string bad = is.handle_command("createPoint " + pid + " nosuch");
  expect(bad.rfind("err UnknownRoutine", 0) == 0, "createPoint nosuch -> " + bad);

  std::uint64_t before = proc.events_posted();
  std::string r = is.handle_command("detach " + pid);
  expect(r.rfind("ok", 0) == 0, "detach -> " + r);
  proc.join();
  expect(!proc.faulted(), "process faulted: " + proc.fault_message());
  // Only the exit event: no controller round trip per hit.
  expect(proc.events_posted() - before == 1, "control events during execution: " +
                                                 std::to_string(proc.events_posted() - before));

  expect(probe::count("sub1") == calls, "sub1 ran " + std::to_string(probe::count("sub1")) + " times");
  auto args = probe::count_args("sub1");
  for (int k = 1; k <= calls; ++k) {
    // Entry of sub2 at iteration k: x(1..k) = 1..k, s = 1.5k.
    const auto& a = args.at(k - 1);
    expect(a.size() == 2 && a[0] == k * (k + 1) / 2.0 && a[1] == 1.5 * k,
           "hit " + std::to_string(k) + " saw the wrong arguments");
  }
}

// --- 11 ----------------------------------------------------------------------

void orchestration_log() {
  if (last_log.empty()) {
    cli::SessionOutcome o = cli::orchestrate(jacobi_session(compare::Mode::ElementWise, 1e-12));
    last_log = o.log;
  }
  std::vector<int> steps;
  for (const auto& line : last_log) {
    json j = json::parse(line);
    if (j.contains("step")) steps.push_back(j["step"].get<int>());
  }
  std::vector<int> want = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::ostringstream got;
  for (int s : steps) got << s << ' ';
  expect(steps == want, "logged steps: " + got.str());
}

// --- 12 ----------------------------------------------------------------------

void bench_orderings() {
  auto rows = cli::bench(cli::BenchOptions{});
  std::cout << cli::bench_table(rows);
  for (const auto& r : rows) {
    std::string tag = r.size + "/" + r.work + ": ";
    expect(r.none <= r.compiled, tag + "none slower than compiled-in");
    expect(r.trap > r.patched, tag + "trap not slower than patched");
    if (r.size == "small")
      expect(std::abs(r.patched - r.compiled) <= 0.15 * r.compiled, tag + "patched differs from compiled-in by over 15%");
  }
}

// --- 13 ----------------------------------------------------------------------

void sequence_mismatch() {
  cli::SessionConfig cfg;
  cfg.serial_path = path("programs/order_serial.mf");
  cfg.parallel_path = path("programs/order_parallel.mf");
  cfg.db_path = path("programs/order.db.json");
  cfg.nranks = 2;
  cfg.monitors = {cli::MonitorSpec::parse("a@order")};
  cli::SessionOutcome o = cli::orchestrate(cfg);
  expect(o.kind == cli::OutcomeKind::SequenceMismatch, "outcome " + std::string(cli::to_string(o.kind)));
  expect(o.exit_code() == 2, "exit code " + std::to_string(o.exit_code()));

  auto [status, out] = shell(kBin + " run --serial " + cfg.serial_path + " --parallel " + *cfg.parallel_path +
                             " --db " + *cfg.db_path + " --ranks 2 --monitor a@order --mode element");
  expect(status == 2, "relcheck run exited " + std::to_string(status));
  expect(out.find("Sequence mismatch") != std::string::npos, "no mismatch message: " + out);
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all = {
      {1, "golden SPMD transformation of the stencil", 1, golden_transformation},
      {2, "local / shift / recurrence loops", 1, triptych},
      {3, "correct Jacobi run in all modes", 10, correct_run},
      {4, "dropped-edge bug found at update exit", 10, bug_reproduction},
      {5, "checksum modes catch the same bug", 10, mode_sensitivity},
      {6, "scatter/gather identity and block invariants", 5, scatter_gather},
      {7, "checksum additivity", 5, checksum_additivity},
      {8, "probes leave results unchanged", 10, probe_transparency},
      {9, "report identical under 20 schedules", 60, determinism},
      {10, "instrumentation server transcript", 1, is_protocol},
      {11, "orchestration steps logged in order", 10, orchestration_log},
      {12, "instrumentation overhead orderings", 120, bench_orderings},
      {13, "checkpoint sequence mismatch", 10, sequence_mismatch},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    std::string why;
    try {
      c.run();
    } catch (const Failure& f) {
      why = f.what;
    } catch (const Error& e) {
      why = e.code() + ": " + e.what();
    } catch (const std::exception& e) {
      why = e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (why.empty() && s > c.budget_s) why = "took longer than " + std::to_string(c.budget_s) + " s";
    char head[160];
    std::snprintf(head, sizeof head, "%s %2d  %-46s %7.2f s", why.empty() ? "PASS" : "FAIL", c.id, c.title, s);
    std::cout << head << (why.empty() ? "" : "\n      " + why) << std::endl;
    failed += !why.empty();
  }
  return failed == 0 ? 0 : 1;
}
