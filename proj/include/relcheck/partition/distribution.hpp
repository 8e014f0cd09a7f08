#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace relcheck::partition {

// Remainder-to-low-ranks block split of lo..hi: with n = hi-lo+1 elements,
// ranks below n % nranks own n / nranks + 1, the rest n / nranks.
// Throws InvalidRank or EmptyRange.
std::pair<std::int64_t, std::int64_t> block_bounds(std::int64_t lo, std::int64_t hi, int nranks,
                                                   int rank);

struct AlignedArray {
  std::string routine;
  std::string array;
  bool operator==(const AlignedArray&) const = default;
  bool operator<(const AlignedArray& o) const {
    return routine != o.routine ? routine < o.routine : array < o.array;
  }
};

struct DistributionSpec {
  std::string array;    // the array the user distributed
  std::string routine;  // scope it was named in
  int dim = 1;          // 1-based distributed dimension
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  int nranks = 1;
  std::vector<AlignedArray> alignment;  // every array sharing this partition

  std::pair<std::int64_t, std::int64_t> bounds(int rank) const {
    return block_bounds(lo, hi, nranks, rank);
  }
  bool covers(const std::string& r, const std::string& a) const;
  // Rank owning global index `idx` of the distributed dimension.
  int owner(std::int64_t idx) const;

  bool operator==(const DistributionSpec&) const = default;
};

}  // namespace relcheck::partition
