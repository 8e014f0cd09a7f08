#include <doctest.h>

#include "support.hpp"

#include <json.hpp>

#include <filesystem>
#include <sstream>

#include "relcheck/cli/bench.hpp"
#include "relcheck/cli/session.hpp"

using namespace relcheck;
using namespace relcheck::test;
namespace fs = std::filesystem;

namespace {

std::string programs(const std::string& name) { return std::string(RELCHECK_SOURCE_DIR) + "/programs/" + name; }

cli::SessionConfig jacobi(int nranks, std::vector<int> drop = {}) {
  cli::SessionConfig cfg;
  cfg.serial_path = programs("jacobi.mf");
  cfg.distribute = cli::DistributeSpec::parse("phi2@jacobi:dim1");
  cfg.nranks = nranks;
  cfg.drop_edges = std::move(drop);
  cfg.monitors = {cli::MonitorSpec::parse("phi2@jacobi")};
  return cfg;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "relcheck-unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("monitor and distribute specs") {
  auto m = cli::MonitorSpec::parse("phi2@jacobi");
  CHECK(m.array == "phi2");
  CHECK(m.routine == "jacobi");
  CHECK(code_of([] { cli::MonitorSpec::parse("phi2"); }) == "ConfigError");
  CHECK(code_of([] { cli::MonitorSpec::parse("@jacobi"); }) == "ConfigError");

  auto d = cli::DistributeSpec::parse("u");
  CHECK(d.array == "u");
  CHECK(d.routine.empty());
  CHECK(d.dim == 1);
  auto e = cli::DistributeSpec::parse("phi@solve:dim2");
  CHECK(e.routine == "solve");
  CHECK(e.dim == 2);
  CHECK(code_of([] { cli::DistributeSpec::parse("u:dimx"); }) == "ConfigError");
  CHECK(code_of([] { cli::DistributeSpec::parse("u:dim0"); }) == "ConfigError");
}

TEST_CASE("configuration errors") {
  auto no_monitor = jacobi(2);
  no_monitor.monitors.clear();
  CHECK(code_of([&] { cli::orchestrate(no_monitor); }) == "ConfigError");

  auto neither = jacobi(2);
  neither.distribute.reset();
  CHECK(code_of([&] { cli::orchestrate(neither); }) == "ConfigError");

  auto no_db = jacobi(2);
  no_db.distribute.reset();
  no_db.parallel_path = programs("order_parallel.mf");
  CHECK(code_of([&] { cli::orchestrate(no_db); }) == "ConfigError");

  cli::SessionConfig wrong_ranks;
  wrong_ranks.serial_path = programs("order_serial.mf");
  wrong_ranks.parallel_path = programs("order_parallel.mf");
  wrong_ranks.db_path = programs("order.db.json");
  wrong_ranks.nranks = 3;
  wrong_ranks.monitors = {cli::MonitorSpec::parse("a@order")};
  CHECK(code_of([&] { cli::orchestrate(wrong_ranks); }) == "ConfigError");

  auto unknown = jacobi(2);
  unknown.monitors = {cli::MonitorSpec::parse("nosuch@jacobi")};
  CHECK_FALSE(code_of([&] { cli::orchestrate(unknown); }).empty());

  CHECK(code_of([] { cli::read_file("/nonexistent/relcheck/file"); }) == "IoError");
}

TEST_CASE("one rank with the edge dropped cannot diverge") {
  auto o = cli::orchestrate(jacobi(1, {1}));
  CHECK(o.kind == cli::OutcomeKind::NoDivergence);
  CHECK(o.checkpoints == 402);
  CHECK(o.exit_code() == 0);
}

TEST_CASE("instrumentation covers the routines writing the monitored storage") {
  auto o = cli::orchestrate(jacobi(2));
  auto has = [&](const std::string& t) {
    return std::find(o.instrumented.begin(), o.instrumented.end(), t) != o.instrumented.end();
  };
  CHECK(has("update:phi4"));
  CHECK(has("setup_grid:phi6"));
  CHECK(has("copyphi:oldphi5"));
  CHECK_FALSE(has("output:phi3"));
}

TEST_CASE("report and log files") {
  auto cfg = jacobi(3, {1});
  cfg.mode.mode = compare::Mode::PartialChecksum;
  cfg.mode.tolerance = 1e-9;
  auto report = scratch("report.json");
  auto log = scratch("log.jsonl");
  cfg.log_path = log.string();
  auto o = cli::orchestrate(cfg);
  REQUIRE(o.kind == cli::OutcomeKind::Divergence);
  CHECK(o.exit_code() == 1);
  std::string text = cli::render_report(o, report.string());
  CHECK(text.rfind("Divergence after", 0) == 0);
  CHECK(cli::read_report(report.string()) == *o.report);

  std::istringstream lines(cli::read_file(log.string()));
  int n = 0;
  for (std::string l; std::getline(lines, l); ++n) CHECK_NOTHROW((void)nlohmann::json::parse(l));
  CHECK(n == int(o.log.size()));

  cli::write_file(report.string(), "{\"v\": 1}");
  CHECK(code_of([&] { cli::read_report(report.string()); }) == "MalformedReport");
  fs::remove_all(report.parent_path());
}

TEST_CASE("bench workload source") {
  std::string plain = cli::bench_program(1000, 500, 2, 10, false);
  std::string probed = cli::bench_program(1000, 500, 2, 10, true);
  CHECK(plain.find("__checksum") == std::string::npos);
  std::size_t first = probed.find("call __checksum(a)");
  REQUIRE(first != std::string::npos);
  CHECK(probed.find("call __checksum(a)", first + 1) != std::string::npos);
  CHECK_NOTHROW((void)inline_program(plain));
  CHECK_NOTHROW((void)inline_program(probed));
  CHECK(cli::time_method("patched", 64, 32, 1, 3) >= 0.0);
  CHECK(code_of([] { cli::time_method("ptrace", 64, 32, 1, 3); }) == "ConfigError");
}

}
