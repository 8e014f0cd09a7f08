#include "relcheck/partition/database.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relcheck/error.hpp"

namespace relcheck::partition {

using nlohmann::json;

const DistributionSpec* ParallelizationDB::distribution_of(const std::string& routine,
                                                           const std::string& array) const {
  for (const auto& d : distributions)
    if (d.covers(routine, array) || (d.routine == routine && d.array == array)) return &d;
  return nullptr;
}

const TargetRecord* ParallelizationDB::targets_for(const std::string& array,
                                                   const std::string& scope) const {
  for (const auto& t : targets)
    if (t.array == array && t.scope == scope) return &t;
  return nullptr;
}

std::string to_json(const ParallelizationDB& db) {
  json j;
  j["v"] = 1;
  json dists = json::array();
  for (const auto& d : db.distributions) {
    json align = json::array();
    for (const auto& a : d.alignment) align.push_back({{"routine", a.routine}, {"array", a.array}});
    dists.push_back({{"array", d.array},
                     {"routine", d.routine},
                     {"dim", d.dim},
                     {"lo", d.lo},
                     {"hi", d.hi},
                     {"nranks", d.nranks},
                     {"alignment", align}});
  }
  j["distributions"] = dists;
  json targets = json::array();
  for (const auto& t : db.targets) {
    json rs = json::array();
    for (const auto& r : t.routines) rs.push_back({{"routine", r.routine}, {"array", r.array}});
    targets.push_back({{"array", t.array}, {"scope", t.scope}, {"routines", rs}});
  }
  j["targets"] = targets;
  j["removed_edges"] = db.removed_edges;
  json binds = json::array();
  for (const auto& b : db.bindings)
    binds.push_back({{"caller", b.caller},
                     {"callee", b.callee},
                     {"position", b.position},
                     {"actual", b.actual},
                     {"formal", b.formal}});
  j["bindings"] = binds;
  return j.dump(2) + "\n";
}

ParallelizationDB from_json(const std::string& text) {
  ParallelizationDB db;
  try {
    json j = json::parse(text);
    if (!j.is_object() || j.at("v").get<int>() != 1)
      throw Error("MalformedDatabase", "unsupported database version");
    for (const auto& d : j.at("distributions")) {
      DistributionSpec s;
      s.array = d.at("array").get<std::string>();
      s.routine = d.at("routine").get<std::string>();
      s.dim = d.at("dim").get<int>();
      s.lo = d.at("lo").get<std::int64_t>();
      s.hi = d.at("hi").get<std::int64_t>();
      s.nranks = d.at("nranks").get<int>();
      for (const auto& a : d.at("alignment"))
        s.alignment.push_back({a.at("routine").get<std::string>(), a.at("array").get<std::string>()});
      if (s.dim < 1 || s.dim > 2 || s.nranks < 1 || s.hi < s.lo || s.nranks > s.hi - s.lo + 1)
        throw Error("MalformedDatabase", "invalid distribution for '" + s.array + "'");
      db.distributions.push_back(std::move(s));
    }
    for (const auto& t : j.at("targets")) {
      TargetRecord r;
      r.array = t.at("array").get<std::string>();
      r.scope = t.at("scope").get<std::string>();
      for (const auto& x : t.at("routines"))
        r.routines.push_back({x.at("routine").get<std::string>(), x.at("array").get<std::string>()});
      db.targets.push_back(std::move(r));
    }
    db.removed_edges = j.at("removed_edges").get<std::vector<int>>();
    for (const auto& b : j.at("bindings"))
      db.bindings.push_back({b.at("caller").get<std::string>(), b.at("callee").get<std::string>(),
                             b.at("position").get<int>(), b.at("actual").get<std::string>(),
                             b.at("formal").get<std::string>()});
  } catch (const json::exception& e) {
    throw Error("MalformedDatabase", std::string("parallelization database: ") + e.what());
  }
  return db;
}

void write_db(const ParallelizationDB& db, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot open '" + path + "' for writing");
  out << to_json(db);
  if (!out) throw Error("IoError", "failed writing '" + path + "'");
}

ParallelizationDB read_db(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace relcheck::partition
