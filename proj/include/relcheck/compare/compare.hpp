#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relcheck/array.hpp"
#include "relcheck/partition/distribution.hpp"

namespace relcheck::compare {

enum class Mode { GlobalChecksum, PartialChecksum, ElementWise };

const char* to_string(Mode m);              // "global" | "partial" | "element"
Mode mode_from_string(const std::string& s);  // throws BadMode

struct ComparisonMode {
  Mode mode = Mode::ElementWise;
  double tolerance = 0.0;  // absolute unless `relative`
  bool relative = false;   // scale tolerance by max(1, |serial|)

  // Throws BadTolerance for negative or non-finite tolerances.
  void validate() const;
  bool within(double serial, double parallel) const;
};

// Left-to-right sum in storage (ascending index) order.
double checksum(std::span<const double> values);
double checksum(const ArrayValue& a);
// Sum over the elements whose `dim` subscript lies in lo..hi.
double checksum(const ArrayValue& a, int dim, std::int64_t lo, std::int64_t hi);
// Block sums of `dist` added in rank order: the association used when rank
// partials are combined, so equal data yields an equal global checksum.
double checksum(const ArrayValue& a, const partition::DistributionSpec& dist);

// Elements of `a` with `dim` subscript in lo..hi, as an array with that
// dimension narrowed. Throws BoundsMismatch if lo..hi is outside the array.
ArrayValue slice(const ArrayValue& a, int dim, std::int64_t lo, std::int64_t hi);

// One rank's share of a distributed array at a checkpoint.
struct Contribution {
  int rank = 0;
  std::int64_t lo = 0;  // owned bounds of the distributed dimension
  std::int64_t hi = -1;
  double checksum = 0.0;           // over owned indices only
  std::optional<ArrayValue> block;  // owned elements, element-wise mode only

  bool operator==(const Contribution&) const = default;
};

// Builds the contribution of `rank` from its local (full-extent) copy.
Contribution contribute(const ArrayValue& local, const partition::DistributionSpec& dist, int rank,
                        bool with_block);

struct Diff {
  std::vector<std::int64_t> index;  // global subscripts
  double serial = 0.0;
  double parallel = 0.0;
  int rank = 0;

  bool operator==(const Diff&) const = default;
};

struct Verdict {
  bool pass = true;
  double delta = 0.0;               // checksum modes: serial minus parallel (first failing rank for partial)
  std::optional<int> failing_rank;  // partial: first failing rank in rank order
  std::vector<bool> rank_pass;      // partial: per rank
  std::vector<Diff> diffs;          // element: every failing index, by global index
};

Verdict compare_global(double serial_ck, const std::vector<double>& partials, const ComparisonMode& m);
Verdict compare_global(double serial_ck, const std::vector<double>& partials, double tol);

// Contributions may arrive in any order. MissingRank, OverlapDetected.
Verdict compare_partial(const ArrayValue& serial, const std::vector<Contribution>& contributions,
                        const partition::DistributionSpec& dist, const ComparisonMode& m);
// Additionally BoundsMismatch when a block disagrees with the distribution.
Verdict compare_element(const ArrayValue& serial, const std::vector<Contribution>& contributions,
                        const partition::DistributionSpec& dist, const ComparisonMode& m);

// Inverse pair over the owned blocks of the distributed dimension.
std::vector<Contribution> scatter(const ArrayValue& global, const partition::DistributionSpec& dist);
ArrayValue reassemble(const std::vector<Contribution>& contributions, const partition::DistributionSpec& dist);

bool bit_equal(const ArrayValue& a, const ArrayValue& b);

}  // namespace relcheck::compare
