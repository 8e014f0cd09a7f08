#include <chrono>
#include <sstream>

#include "relcheck/probe/probe.hpp"

namespace relcheck::probe {

namespace {

constexpr auto kPoll = std::chrono::milliseconds(5);

std::mutex links_mu;
std::map<std::string, std::shared_ptr<ComparisonLink>>& links() {
  static std::map<std::string, std::shared_ptr<ComparisonLink>> m;
  return m;
}

[[noreturn]] void terminated() { throw Error("Terminated", "terminated by controller"); }

}  // namespace

std::string CheckpointKey::text() const {
  return "(" + routine + ", " + runtime::to_string(site) + ", " + std::to_string(invocation) + ") " + array;
}

ComparisonLink::ComparisonLink(std::string name, int nranks, std::size_t capacity)
    : name_(std::move(name)), nranks_(nranks), capacity_(capacity ? capacity : 1), queues_(std::size_t(nranks)) {
  if (nranks < 1) throw Error("InvalidRank", "a comparison link needs at least one rank");
}

void ComparisonLink::bind(runtime::Process* serial, std::vector<runtime::Process*> ranks) {
  std::lock_guard<std::mutex> lk(mu_);
  serial_ = serial;
  ranks_ = std::move(ranks);
}

bool ComparisonLink::gone(const runtime::Process* p) const {
  return p && p->state() == runtime::ProcState::Exited;
}

void ComparisonLink::send(runtime::Process& self, ContributionMessage m) {
  const int r = m.contribution.rank;
  if (r < 0 || r >= nranks_)
    throw Error("LinkFailure", "link '" + name_ + "' has no rank " + std::to_string(r));
  std::unique_lock<std::mutex> lk(mu_);
  for (;;) {
    if (!closed_.empty()) throw Error("LinkFailure", "link '" + name_ + "' closed: " + closed_);
    if (self.terminating()) terminated();
    if (queues_[r].size() < capacity_) break;
    if (gone(serial_))
      throw Error("SequenceMismatch", "serial execution finished before checkpoint " + m.key.text() + " of rank " +
                                          std::to_string(r));
    cv_.wait_for(lk, kPoll);
  }
  queues_[r].push_back(std::move(m));
  ++messages_;
  cv_.notify_all();
}

std::vector<compare::Contribution> ComparisonLink::collect(runtime::Process& self, const CheckpointKey& key) {
  std::vector<compare::Contribution> out;
  std::unique_lock<std::mutex> lk(mu_);
  for (int r = 0; r < nranks_; ++r) {
    for (;;) {
      if (!queues_[r].empty()) break;
      if (!closed_.empty()) throw Error("LinkFailure", "link '" + name_ + "' closed: " + closed_);
      if (self.terminating()) terminated();
      // Sends take the lock, so an exited rank with an empty queue has nothing left to send.
      if (r < int(ranks_.size()) && gone(ranks_[r]))
        throw Error("SequenceMismatch", "rank " + std::to_string(r) + " finished before serial checkpoint " +
                                            key.text());
      cv_.wait_for(lk, kPoll);
    }
    ContributionMessage m = std::move(queues_[r].front());
    queues_[r].pop_front();
    cv_.notify_all();
    if (!(m.key == key))
      throw Error("SequenceMismatch", "serial checkpoint " + key.text() + " but rank " + std::to_string(r) +
                                          " sent " + m.key.text());
    out.push_back(std::move(m.contribution));
  }
  ++checkpoints_;
  return out;
}

void ComparisonLink::close(const std::string& why) {
  std::lock_guard<std::mutex> lk(mu_);
  if (closed_.empty()) closed_ = why.empty() ? "closed" : why;
  cv_.notify_all();
}

std::uint64_t ComparisonLink::messages() const {
  std::lock_guard<std::mutex> lk(mu_);
  return messages_;
}

std::uint64_t ComparisonLink::checkpoints() const {
  std::lock_guard<std::mutex> lk(mu_);
  return checkpoints_;
}

std::optional<compare::DivergenceReport> ComparisonLink::first_report() const {
  std::lock_guard<std::mutex> lk(mu_);
  return report_;
}

void ComparisonLink::record(const compare::DivergenceReport& r) {
  std::lock_guard<std::mutex> lk(mu_);
  if (!report_) report_ = r;
}

void register_link(std::shared_ptr<ComparisonLink> link) {
  std::lock_guard<std::mutex> lk(links_mu);
  links()[link->name()] = std::move(link);
}

std::shared_ptr<ComparisonLink> find_link(const std::string& name) {
  std::lock_guard<std::mutex> lk(links_mu);
  auto it = links().find(name);
  return it == links().end() ? nullptr : it->second;
}

void unregister_link(const std::string& name) {
  std::lock_guard<std::mutex> lk(links_mu);
  links().erase(name);
}

std::string encode_distribution(const partition::DistributionSpec& d) {
  return std::to_string(d.lo) + ":" + std::to_string(d.hi) + ":" + std::to_string(d.nranks) + ":" +
         std::to_string(d.dim);
}

partition::DistributionSpec decode_distribution(const std::string& s) {
  std::istringstream in(s);
  partition::DistributionSpec d;
  char c1 = 0, c2 = 0, c3 = 0;
  if (!(in >> d.lo >> c1 >> d.hi >> c2 >> d.nranks >> c3 >> d.dim) || c1 != ':' || c2 != ':' || c3 != ':' ||
      in.peek() != std::char_traits<char>::eof() || d.nranks < 1 || d.dim < 1 || d.hi < d.lo)
    throw Error("BadMetadata", "distribution must be lo:hi:nranks:dim, got '" + s + "'");
  return d;
}

}  // namespace relcheck::probe
