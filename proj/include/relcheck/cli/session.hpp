#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relcheck/compare/compare.hpp"
#include "relcheck/compare/report.hpp"
#include "relcheck/lang/ast.hpp"
#include "relcheck/partition/database.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::cli {

// `array@routine`
struct MonitorSpec {
  std::string array;
  std::string routine;
  static MonitorSpec parse(const std::string& s);  // ConfigError
};

// `array[@routine][:dimN]`; routine defaults to the main program, dim to 1.
struct DistributeSpec {
  std::string array;
  std::string routine;
  int dim = 1;
  static DistributeSpec parse(const std::string& s);  // ConfigError
};

struct SessionConfig {
  // Serial reference: a path, or inline text when `serial_source` is set.
  std::string serial_path;
  std::optional<std::string> serial_source;
  // Pre-parallelized SPMD program; requires `db_path`.
  std::optional<std::string> parallel_path;
  std::optional<std::string> parallel_source;
  // Otherwise the serial program is parallelized here.
  std::optional<DistributeSpec> distribute;
  std::vector<int> drop_edges;
  int nranks = 1;

  std::vector<MonitorSpec> monitors;
  compare::ComparisonMode mode;
  std::optional<std::string> db_path;      // read for --parallel, written otherwise
  std::optional<std::string> report_path;  // DivergenceReport JSON
  std::optional<std::string> log_path;     // JSON lines
  std::string contact_path;                // default: a fresh temporary file
  std::optional<std::uint64_t> sched_seed;
  std::chrono::milliseconds timeout{60000};
};

enum class OutcomeKind { NoDivergence, Divergence, SequenceMismatch };
const char* to_string(OutcomeKind k);

struct SessionOutcome {
  OutcomeKind kind = OutcomeKind::NoDivergence;
  std::uint64_t checkpoints = 0;                 // serial comparisons completed
  std::optional<compare::DivergenceReport> report;
  std::string detail;                            // SequenceMismatch message
  std::vector<std::string> log;                  // one JSON object per line
  std::vector<std::string> instrumented;         // "routine:array" in instrumentation order
  runtime::FinalState serial_final;              // NoDivergence only
  std::vector<runtime::FinalState> rank_finals;  // NoDivergence only, rank order
  partition::ParallelizationDB db;
  std::string spmd_source;

  // 0 NoDivergence, 1 Divergence, 2 SequenceMismatch.
  int exit_code() const;
};

// Runs the coordinated serial/parallel session. ConfigError for invalid
// configurations; other module errors propagate.
SessionOutcome orchestrate(const SessionConfig& cfg);

// Human-readable summary; writes the DivergenceReport JSON to `path` when
// given and a report exists (IoError).
std::string render_report(const SessionOutcome& outcome, const std::optional<std::string>& path = std::nullopt);

// Reads a report file written by render_report. IoError, MalformedReport.
compare::DivergenceReport read_report(const std::string& path);

std::string read_file(const std::string& path);                       // IoError
void write_file(const std::string& path, const std::string& content);  // IoError

}  // namespace relcheck::cli
