#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relcheck/compare/compare.hpp"
#include "relcheck/compare/report.hpp"
#include "relcheck/runtime/runtime.hpp"

namespace relcheck::probe {

// Name of the resident marker called on the serial side when a comparison fails.
inline constexpr const char* kDiffDetected = "__diff_detected";

struct CheckpointKey {
  std::string routine;
  runtime::Site site = runtime::Site::Entry;
  int invocation = 0;
  std::string array;

  auto operator<=>(const CheckpointKey&) const = default;
  std::string text() const;  // "(update, exit, 1) phi4"
};

struct ContributionMessage {
  CheckpointKey key;
  compare::Contribution contribution;
};

// Channel from the ranks of the parallel execution to the serial process.
// Each rank has a bounded FIFO; the serial side drains one message per rank
// per checkpoint, in rank order.
class ComparisonLink {
 public:
  ComparisonLink(std::string name, int nranks, std::size_t capacity = 1);

  const std::string& name() const { return name_; }
  int nranks() const { return nranks_; }

  // Processes whose exit makes a pending wait fail with LinkFailure.
  void bind(runtime::Process* serial, std::vector<runtime::Process*> ranks);
  // Parallel side. Blocks while the rank's queue is full.
  void send(runtime::Process& self, ContributionMessage m);
  // Serial side: one contribution per rank for `key`. SequenceMismatch, LinkFailure.
  std::vector<compare::Contribution> collect(runtime::Process& self, const CheckpointKey& key);
  void close(const std::string& why);

  std::uint64_t messages() const;     // accepted sends
  std::uint64_t checkpoints() const;  // completed collects
  std::optional<compare::DivergenceReport> first_report() const;
  void record(const compare::DivergenceReport& r);

 private:
  bool gone(const runtime::Process* p) const;

  const std::string name_;
  const int nranks_;
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::deque<ContributionMessage>> queues_;
  runtime::Process* serial_ = nullptr;
  std::vector<runtime::Process*> ranks_;
  std::string closed_;
  std::uint64_t messages_ = 0;
  std::uint64_t checkpoints_ = 0;
  std::optional<compare::DivergenceReport> report_;
};

void register_link(std::shared_ptr<ComparisonLink> link);
std::shared_ptr<ComparisonLink> find_link(const std::string& name);
void unregister_link(const std::string& name);

// "lo:hi:nranks:dim" for the metadata of inserted calls.
std::string encode_distribution(const partition::DistributionSpec& d);
partition::DistributionSpec decode_distribution(const std::string& s);  // BadMetadata

// Registers __count, __send_contribution, __receive_and_compare and
// __diff_detected. Idempotent.
//
// Metadata read by the comparison residents (inserted-call meta, else launch
// defaults): link, mode, tolerance, array, dist.
void register_builtin_residents();

// __count: hits per key (meta "counter", else the calling routine) and the
// argument values of every hit (array arguments contribute their checksum).
std::int64_t count(const std::string& key);
std::vector<std::vector<double>> count_args(const std::string& key);
void reset_counts();

// Line-oriented instrumentation server. Commands:
//   attach <label> <pid>       detach <pid>      stop <pid>     continue <pid>
//   createPoint <pid> <routine> [entry|exit]
//   insertCall <pid> [<point-id>|<routine>] <fn> <argpos>... [key=value]...
// Responses are "ok <detail>" or "err <code> <message>".
class InstrumentationServer {
 public:
  explicit InstrumentationServer(runtime::Runtime& rt, std::string name = "IS");

  const std::string& name() const { return name_; }
  std::string handle_command(const std::string& line);
  // Reads commands until EOF or "quit", writing one response per line.
  void serve(std::istream& in, std::ostream& out);
  std::uint64_t commands() const { return commands_; }

 private:
  std::string dispatch(const std::vector<std::string>& words);
  runtime::Process& attached(int pid);

  runtime::Runtime& rt_;
  std::string name_;
  std::map<int, std::map<std::string, int>> last_point_of_;  // pid -> routine -> point
  std::uint64_t commands_ = 0;
};

}  // namespace relcheck::probe
