#include <cstdlib>

#include "relcheck/probe/probe.hpp"

namespace relcheck::probe {

namespace {

std::mutex counts_mu;
std::map<std::string, std::vector<std::vector<double>>>& hits() {
  static std::map<std::string, std::vector<std::vector<double>>> m;
  return m;
}

std::string need(const runtime::ResidentCall& rc, const std::string& key) {
  auto v = rc.get(key);
  if (!v) throw Error("BadMetadata", "resident call in " + rc.routine + " lacks '" + key + "'");
  return *v;
}

compare::ComparisonMode mode_of(const runtime::ResidentCall& rc) {
  compare::ComparisonMode m;
  m.mode = compare::mode_from_string(need(rc, "mode"));
  auto tol = rc.get("tolerance");
  if (tol) {
    char* end = nullptr;
    m.tolerance = std::strtod(tol->c_str(), &end);
    if (end == tol->c_str() || *end) throw Error("BadMetadata", "tolerance '" + *tol + "' is not a number");
  }
  m.relative = rc.get("relative").value_or("") == "1";
  m.validate();
  return m;
}

const ArrayValue& array_arg(const runtime::ResidentCall& rc, const char* who) {
  if (rc.args.empty() || !rc.args[0].array)
    throw Error("BadArgPosition", std::string(who) + " in " + rc.routine + " needs an array as its first argument");
  return *rc.args[0].array;
}

std::shared_ptr<ComparisonLink> link_of(const runtime::ResidentCall& rc) {
  std::string name = need(rc, "link");
  auto link = find_link(name);
  if (!link) throw Error("LinkFailure", "no comparison link named '" + name + "'");
  return link;
}

CheckpointKey key_of(const runtime::ResidentCall& rc) {
  return {rc.routine, rc.site, rc.invocation, rc.get("array").value_or(rc.args.empty() ? "" : rc.args[0].name)};
}

void send_contribution(runtime::ResidentCall& rc) {
  const ArrayValue& local = array_arg(rc, "__send_contribution");
  if (rc.process.rank() < 0) throw Error("BadMetadata", "__send_contribution called on a serial process");
  auto m = mode_of(rc);
  auto dist = decode_distribution(need(rc, "dist"));
  auto link = link_of(rc);
  ContributionMessage msg;
  msg.key = key_of(rc);
  msg.contribution = compare::contribute(local, dist, rc.process.rank(), m.mode == compare::Mode::ElementWise);
  link->send(rc.process, std::move(msg));
}

void receive_and_compare(runtime::ResidentCall& rc) {
  const ArrayValue& serial = array_arg(rc, "__receive_and_compare");
  auto m = mode_of(rc);
  auto dist = decode_distribution(need(rc, "dist"));
  auto link = link_of(rc);
  CheckpointKey key = key_of(rc);
  auto contributions = link->collect(rc.process, key);
  compare::Verdict v;
  switch (m.mode) {
    case compare::Mode::GlobalChecksum: {
      std::vector<double> partials(std::size_t(dist.nranks), 0.0);
      for (const auto& c : contributions)
        if (c.rank >= 0 && c.rank < dist.nranks) partials[std::size_t(c.rank)] = c.checksum;
      v = compare::compare_global(compare::checksum(serial, dist), partials, m);
      break;
    }
    case compare::Mode::PartialChecksum: v = compare::compare_partial(serial, contributions, dist, m); break;
    case compare::Mode::ElementWise: v = compare::compare_element(serial, contributions, dist, m); break;
  }
  if (v.pass) return;
  auto report = compare::make_report(key.routine, runtime::to_string(key.site), key.invocation, key.array, m, v);
  link->record(report);
  std::string payload = compare::report_text(report);
  rc.process.trap(kDiffDetected, runtime::Site::Entry, 1, payload);
  rc.process.trap(kDiffDetected, runtime::Site::Exit, 1, payload);
}

void count_hit(runtime::ResidentCall& rc) {
  std::vector<double> values;
  for (const auto& a : rc.args) values.push_back(a.array ? compare::checksum(*a.array) : a.value());
  std::string key = rc.get("counter").value_or(rc.routine);
  std::lock_guard<std::mutex> lk(counts_mu);
  hits()[key].push_back(std::move(values));
}

}  // namespace

void register_builtin_residents() {
  static std::once_flag once;
  std::call_once(once, [] {
    runtime::register_resident("__count", count_hit);
    runtime::register_resident("__send_contribution", send_contribution);
    runtime::register_resident("__receive_and_compare", receive_and_compare);
    // The marker itself does nothing; callers stop on its breakpoint.
    runtime::register_resident(kDiffDetected, [](runtime::ResidentCall&) {});
  });
}

std::int64_t count(const std::string& key) {
  std::lock_guard<std::mutex> lk(counts_mu);
  auto it = hits().find(key);
  return it == hits().end() ? 0 : std::int64_t(it->second.size());
}

std::vector<std::vector<double>> count_args(const std::string& key) {
  std::lock_guard<std::mutex> lk(counts_mu);
  auto it = hits().find(key);
  return it == hits().end() ? std::vector<std::vector<double>>{} : it->second;
}

void reset_counts() {
  std::lock_guard<std::mutex> lk(counts_mu);
  hits().clear();
}

}  // namespace relcheck::probe
