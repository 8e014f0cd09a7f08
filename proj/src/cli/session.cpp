#include "relcheck/cli/session.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "relcheck/depan/depan.hpp"
#include "relcheck/lang/parser.hpp"
#include "relcheck/lang/printer.hpp"
#include "relcheck/lang/typecheck.hpp"
#include "relcheck/partition/partition.hpp"
#include "relcheck/probe/probe.hpp"

namespace relcheck::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error("ConfigError", msg); }

// Names are case-insensitive and stored lower-case.
std::string lower(std::string s) {
  for (auto& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::atomic<int> session_counter{0};

class Log {
 public:
  explicit Log(std::vector<std::string>& lines) : lines_(lines) {}
  // Numbered steps of the protocol; notes carry a phase name instead.
  void step(int n, const std::string& event, json detail = json::object()) {
    add("step", json(n), event, std::move(detail));
  }
  void note(const std::string& phase, const std::string& event, json detail = json::object()) {
    add("phase", json(phase), event, std::move(detail));
  }

 private:
  void add(const char* key, json tag, const std::string& event, json detail) {
    json j;
    j[key] = std::move(tag);
    j["event"] = event;
    j["detail"] = std::move(detail);
    lines_.push_back(j.dump());
  }
  std::vector<std::string>& lines_;
};

lang::Program load(const std::optional<std::string>& text, const std::string& path) {
  std::string src = text ? *text : read_file(path);
  lang::Program p = lang::parse_or_throw(src);
  lang::typecheck(p);
  return p;
}

// Issues an IS command and turns an error response back into an exception.
std::string is_cmd(probe::InstrumentationServer& is, const std::string& line) {
  std::string r = is.handle_command(line);
  if (r.rfind("ok", 0) == 0) return r;
  std::istringstream in(r);
  std::string err, code;
  in >> err >> code;
  std::string rest;
  std::getline(in, rest);
  throw Error(code.empty() ? "InstrumentationError" : code,
              "'" + line + "': " + (rest.empty() ? r : rest.substr(1)));
}

int point_of(const std::string& response) {
  // "ok point N"
  return std::stoi(response.substr(response.rfind(' ') + 1));
}

std::vector<std::pair<int, int>> read_contact(const std::string& path) {
  std::vector<std::pair<int, int>> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    int rank = 0, pid = 0;
    std::string label;
    if (ls >> rank >> pid >> label) out.emplace_back(rank, pid);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Target {
  std::string routine;
  std::string array;
  int serial_pos = 0;
  int parallel_pos = 0;
  std::string dist;
};

}  // namespace

MonitorSpec MonitorSpec::parse(const std::string& s) {
  auto at = s.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == s.size() || s.find('@', at + 1) != std::string::npos)
    config_error("monitor must be array@routine, got '" + s + "'");
  return {lower(s.substr(0, at)), lower(s.substr(at + 1))};
}

DistributeSpec DistributeSpec::parse(const std::string& s) {
  DistributeSpec d;
  std::string rest = s;
  auto colon = rest.find(':');
  if (colon != std::string::npos) {
    std::string dim = lower(rest.substr(colon + 1));
    rest = rest.substr(0, colon);
    if (dim.rfind("dim", 0) == 0) dim = dim.substr(3);
    try {
      std::size_t used = 0;
      d.dim = std::stoi(dim, &used);
      if (used != dim.size() || d.dim < 1) throw std::invalid_argument(dim);
    } catch (const std::exception&) {
      config_error("distribution dimension must be dimN, got '" + s + "'");
    }
  }
  auto at = rest.find('@');
  d.array = lower(rest.substr(0, at));
  if (at != std::string::npos) d.routine = lower(rest.substr(at + 1));
  if (d.array.empty()) config_error("distribution needs an array name, got '" + s + "'");
  return d;
}

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::NoDivergence: return "NoDivergence";
    case OutcomeKind::Divergence: return "Divergence";
    case OutcomeKind::SequenceMismatch: return "SequenceMismatch";
  }
  return "?";
}

int SessionOutcome::exit_code() const {
  switch (kind) {
    case OutcomeKind::NoDivergence: return 0;
    case OutcomeKind::Divergence: return 1;
    case OutcomeKind::SequenceMismatch: return 2;
  }
  return 2;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw Error("IoError", "cannot write '" + path + "'");
}

namespace {

void write_log(const SessionConfig& cfg, const SessionOutcome& out) {
  if (!cfg.log_path) return;
  std::string text;
  for (const auto& l : out.log) text += l + "\n";
  write_file(*cfg.log_path, text);
}

void run_session(const SessionConfig& cfg, SessionOutcome& out) {
  probe::register_builtin_residents();
  Log log(out.log);
  cfg.mode.validate();
  if (cfg.nranks < 1) config_error("nranks must be at least 1");
  if (cfg.monitors.empty()) config_error("at least one monitored array@routine is required");

  // Reference program and its parallel counterpart.
  lang::Program serial = load(cfg.serial_source, cfg.serial_path);
  if (serial.form != lang::Form::Serial) config_error("the reference program must be serial");
  lang::Program spmd;
  if (cfg.parallel_path || cfg.parallel_source) {
    if (!cfg.db_path) config_error("a pre-parallelized program needs --db");
    spmd = load(cfg.parallel_source, cfg.parallel_path.value_or(""));
    out.db = partition::read_db(*cfg.db_path);
    for (const auto& d : out.db.distributions)
      if (d.nranks != cfg.nranks)
        config_error("database partitions '" + d.array + "' over " + std::to_string(d.nranks) + " ranks, not " +
                     std::to_string(cfg.nranks));
  } else {
    if (!cfg.distribute) config_error("give either a parallel program or a distribution");
    const auto& d = *cfg.distribute;
    std::string routine = d.routine.empty() ? serial.main().name : d.routine;
    auto defuse = depan::build_defuse(serial);
    auto dist = partition::make_distribution(serial, d.array, routine, d.dim, cfg.nranks);
    auto res = partition::parallelize(serial, dist, defuse, cfg.drop_edges);
    spmd = std::move(res.program);
    out.db = std::move(res.db);
    if (cfg.db_path) partition::write_db(out.db, *cfg.db_path);
  }
  out.spmd_source = lang::pretty_print(spmd);
  for (const auto& m : cfg.monitors) {
    const lang::Routine* r = serial.find(m.routine);
    if (!r) config_error("monitored routine '" + m.routine + "' does not exist");
    if (!r->find_decl(m.array)) config_error("array '" + m.array + "' is not declared in routine '" + m.routine + "'");
  }

  runtime::Runtime rt;
  const std::string link_name = "link-" + std::to_string(::getpid()) + "-" + std::to_string(session_counter++);
  std::string contact = cfg.contact_path;
  if (contact.empty())
    contact = (std::filesystem::temp_directory_path() / ("relcheck-" + link_name + ".contact")).string();
  auto link = std::make_shared<probe::ComparisonLink>(link_name, cfg.nranks);
  probe::register_link(link);

  std::map<std::string, std::string> defaults = {
      {"link", link_name},
      {"mode", compare::to_string(cfg.mode.mode)},
      {"tolerance", [&] {
         std::ostringstream os;
         os.precision(17);
         os << cfg.mode.tolerance;
         return os.str();
       }()},
      {"relative", cfg.mode.relative ? "1" : "0"}};

  std::vector<runtime::Process*> all;
  auto teardown = [&](const std::string& why) {
    link->close(why);
    for (auto* p : all) p->terminate();
    for (auto* p : all) p->join();
    probe::unregister_link(link_name);
    std::error_code ec;
    if (cfg.contact_path.empty()) std::filesystem::remove(contact, ec);
  };

  try {
    // (1) Breakpoint on the divergence marker in the serial process.
    runtime::LaunchOptions sopts;
    sopts.label = "S";
    sopts.stop_at_entry = true;
    sopts.breakpoints = {{probe::kDiffDetected, runtime::Site::Entry}};
    sopts.resident_defaults = defaults;
    sopts.sched_seed = cfg.sched_seed;
    runtime::Process& sp = rt.launch_serial(serial, sopts);
    all.push_back(&sp);
    log.step(1, "arm_breakpoint", {{"pid", sp.pid()}, {"routine", probe::kDiffDetected}});

    // (2) Start the serial execution; it halts before user code.
    sp.start();
    log.step(2, "run_serial", {{"pid", sp.pid()}});

    // (3) Launch the parallel execution.
    runtime::LaunchOptions popts;
    popts.label = "P";
    popts.stop_at_entry = true;
    popts.resident_defaults = defaults;
    popts.sched_seed = cfg.sched_seed;
    if (!out.db.distributions.empty()) popts.distribution = out.db.distributions.front();
    auto ranks = rt.spawn_parallel(spmd, cfg.nranks, contact, popts);
    all.insert(all.end(), ranks.begin(), ranks.end());
    link->bind(&sp, ranks);
    log.step(3, "launch_parallel", {{"nranks", cfg.nranks}});

    // (4) Wait until every rank has recorded its contact line.
    const auto deadline = std::chrono::steady_clock::now() + cfg.timeout;
    while (read_contact(contact).size() < std::size_t(cfg.nranks)) {
      if (std::chrono::steady_clock::now() > deadline) throw Error("Timeout", "contact file never completed");
      for (auto* r : ranks)
        if (r->state() == runtime::ProcState::Exited)
          throw Error(r->fault_code().empty() ? "SpawnFailure" : r->fault_code(),
                      "rank " + std::to_string(r->rank()) + " exited before recording contact information: " +
                          r->fault_message());
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    log.step(4, "contact_file", {{"path", contact}});

    // (5) Instrumentation server.
    probe::InstrumentationServer is(rt);
    log.step(5, "start_is", {{"name", is.name()}});

    // (6) IS attaches to the serial process.
    is_cmd(is, "attach S " + std::to_string(sp.pid()));
    log.step(6, "attach_serial", {{"pid", sp.pid()}});

    // (7) Contact information read; attach requests sent.
    auto entries = read_contact(contact);
    json pids = json::array();
    for (auto [rank, pid] : entries) pids.push_back({{"rank", rank}, {"pid", pid}});
    log.step(7, "read_contact", {{"ranks", pids}});

    // (8) IS attaches to every rank.
    for (auto [rank, pid] : entries) is_cmd(is, "attach P " + std::to_string(pid));
    log.step(8, "attach_parallel", {{"count", entries.size()}});

    // (9) Instrumentation targets from the parallelization database.
    std::vector<Target> targets;
    std::set<std::pair<std::string, std::string>> seen;
    json tj = json::array();
    for (const auto& m : cfg.monitors) {
      const partition::TargetRecord* rec = out.db.targets_for(m.array, m.routine);
      if (!rec) config_error("no database record for " + m.array + "@" + m.routine);
      for (const auto& t : rec->routines) {
        if (!seen.insert({t.routine, t.array}).second) continue;
        Target tg;
        tg.routine = t.routine;
        tg.array = t.array;
        const lang::Routine* sr = serial.find(t.routine);
        const lang::Routine* pr = spmd.find(t.routine);
        tg.serial_pos = sr ? sr->formal_position(t.array) : 0;
        tg.parallel_pos = pr ? pr->formal_position(t.array) : 0;
        const partition::DistributionSpec* d = out.db.distribution_of(t.routine, t.array);
        if (d) tg.dist = probe::encode_distribution(*d);
        std::string skip;
        if (!d) skip = "replicated";
        else if (!tg.serial_pos || !tg.parallel_pos) skip = "not a formal parameter";
        tj.push_back({{"routine", t.routine}, {"array", t.array}, {"skip", skip}});
        if (skip.empty()) targets.push_back(tg);
      }
    }
    log.step(9, "query_db", {{"targets", tj}});

    // Serial first, then ranks; entry and exit of every target.
    auto instrument = [&](int pid, bool is_serial) {
      for (const auto& t : targets) {
        for (const char* site : {"entry", "exit"}) {
          int pt = point_of(is_cmd(is, "createPoint " + std::to_string(pid) + " " + t.routine + " " + site));
          is_cmd(is, "insertCall " + std::to_string(pid) + " " + std::to_string(pt) + " " +
                         (is_serial ? "__receive_and_compare " : "__send_contribution ") +
                         std::to_string(is_serial ? t.serial_pos : t.parallel_pos) + " array=" + t.array +
                         " dist=" + t.dist);
        }
      }
    };
    instrument(sp.pid(), true);
    for (auto [rank, pid] : entries) instrument(pid, false);
    for (const auto& t : targets) out.instrumented.push_back(t.routine + ":" + t.array);
    log.note("instrument", "insert_calls", {{"points", 2 * targets.size()}, {"processes", 1 + entries.size()}});

    for (auto [rank, pid] : entries) is_cmd(is, "detach " + std::to_string(pid));
    log.note("detach", "detach_parallel", {{"count", entries.size()}});

    sp.continue_();
    log.note("continue", "continue_serial", {{"pid", sp.pid()}});

    // React to the serial process until it traps or exits.
    for (;;) {
      auto now = std::chrono::steady_clock::now();
      if (now > deadline) throw Error("Timeout", "session exceeded its time limit");
      auto ev = sp.wait_event(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
      if (!ev) continue;
      if (ev->kind == runtime::Event::Kind::Stopped) continue;
      if (ev->kind == runtime::Event::Kind::Breakpoint) {
        if (ev->routine != probe::kDiffDetected) continue;
        auto report = compare::parse_report(ev->payload);
        if (const lang::Routine* r = spmd.find(report.routine)) report.spmd_source = lang::print_routine(spmd, *r);
        out.kind = OutcomeKind::Divergence;
        out.checkpoints = link->checkpoints();
        out.report = report;
        log.note("result", "divergence", {{"routine", report.routine}, {"site", report.site},
                                          {"invocation", report.invocation}, {"checkpoints", out.checkpoints}});
        teardown("divergence detected");
        return;
      }
      break;  // Exited
    }

    if (sp.faulted()) {
      if (sp.fault_code() == "SequenceMismatch") {
        out.kind = OutcomeKind::SequenceMismatch;
        out.detail = sp.fault_message();
        out.checkpoints = link->checkpoints();
        log.note("result", "sequence_mismatch", {{"detail", out.detail}});
        teardown("sequence mismatch");
        return;
      }
      throw Error(sp.fault_code(), "serial execution: " + sp.fault_message());
    }
    for (auto* r : ranks) r->join();
    for (auto* r : ranks) {
      if (!r->faulted()) continue;
      if (r->fault_code() == "SequenceMismatch" || r->fault_code() == "LinkFailure") {
        out.kind = OutcomeKind::SequenceMismatch;
        out.detail = "rank " + std::to_string(r->rank()) + ": " + r->fault_message();
        out.checkpoints = link->checkpoints();
        log.note("result", "sequence_mismatch", {{"detail", out.detail}});
        teardown("sequence mismatch");
        return;
      }
      throw Error(r->fault_code(), "rank " + std::to_string(r->rank()) + ": " + r->fault_message());
    }
    out.kind = OutcomeKind::NoDivergence;
    out.checkpoints = link->checkpoints();
    out.serial_final = sp.final_state();
    for (auto* r : ranks) out.rank_finals.push_back(r->final_state());
    log.note("result", "no_divergence", {{"checkpoints", out.checkpoints}});
    teardown("session complete");
  } catch (...) {
    teardown("session aborted");
    throw;
  }
}

}  // namespace

SessionOutcome orchestrate(const SessionConfig& cfg) {
  SessionOutcome out;
  try {
    run_session(cfg, out);
  } catch (...) {
    write_log(cfg, out);
    throw;
  }
  write_log(cfg, out);
  return out;
}

std::string render_report(const SessionOutcome& o, const std::optional<std::string>& path) {
  std::ostringstream os;
  switch (o.kind) {
    case OutcomeKind::NoDivergence:
      os << "No divergence: " << o.checkpoints << " checkpoints compared, 0 differences\n";
      break;
    case OutcomeKind::SequenceMismatch:
      os << "Sequence mismatch after " << o.checkpoints << " checkpoints: " << o.detail << '\n';
      break;
    case OutcomeKind::Divergence:
      os << "Divergence after " << o.checkpoints << " checkpoints\n";
      if (o.report) os << compare::message(*o.report);
      break;
  }
  if (path && o.report) write_file(*path, compare::report_text(*o.report) + "\n");
  return os.str();
}

compare::DivergenceReport read_report(const std::string& path) { return compare::parse_report(read_file(path)); }

}  // namespace relcheck::cli
