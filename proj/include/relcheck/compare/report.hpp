#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relcheck/compare/compare.hpp"

namespace relcheck::compare {

// First failing checkpoint of a relative-debugging run.
struct DivergenceReport {
  std::string routine;
  std::string site;  // "entry" | "exit"
  int invocation = 0;
  std::string array;  // local name in `routine`
  Mode mode = Mode::ElementWise;
  double tolerance = 0.0;
  std::optional<double> checksum_delta;  // checksum modes
  std::optional<int> failing_rank;       // partial checksum
  std::vector<Diff> diffs;               // element-wise
  std::string spmd_source;               // generated SPMD text of `routine`

  // Throws MalformedReport when the discrepancy is empty or inconsistent.
  void validate() const;
  bool operator==(const DivergenceReport&) const = default;
};

DivergenceReport make_report(const std::string& routine, const std::string& site, int invocation,
                             const std::string& array, const ComparisonMode& m, const Verdict& v);

// JSON text (indent 2); parse_report validates and throws MalformedReport.
std::string report_text(const DivergenceReport& r);
DivergenceReport parse_report(const std::string& text);

// "Value of array phi4 differs at exit of update (invocation 1) ..." plus details.
std::string message(const DivergenceReport& r);

}  // namespace relcheck::compare
