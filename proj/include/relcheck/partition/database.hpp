#pragma once

#include <string>
#include <vector>

#include "relcheck/depan/depan.hpp"
#include "relcheck/partition/distribution.hpp"

namespace relcheck::partition {

// Instrumentation targets for monitoring `array` as seen from `scope`.
struct TargetRecord {
  std::string array;
  std::string scope;
  std::vector<depan::TargetRef> routines;
  bool operator==(const TargetRecord&) const = default;
};

struct Binding {
  std::string caller;
  std::string callee;
  int position = 0;  // 1-based
  std::string actual;
  std::string formal;
  bool operator==(const Binding&) const = default;
};

struct ParallelizationDB {
  std::vector<DistributionSpec> distributions;
  std::vector<TargetRecord> targets;
  std::vector<int> removed_edges;
  std::vector<Binding> bindings;

  const DistributionSpec* distribution_of(const std::string& routine, const std::string& array) const;
  const TargetRecord* targets_for(const std::string& array, const std::string& scope) const;

  bool operator==(const ParallelizationDB&) const = default;
};

std::string to_json(const ParallelizationDB& db);
// Throws MalformedDatabase.
ParallelizationDB from_json(const std::string& text);

// Throws IoError.
void write_db(const ParallelizationDB& db, const std::string& path);
// Throws IoError or MalformedDatabase.
ParallelizationDB read_db(const std::string& path);

}  // namespace relcheck::partition
