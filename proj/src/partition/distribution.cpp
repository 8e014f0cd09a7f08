#include "relcheck/partition/distribution.hpp"

#include "relcheck/error.hpp"

namespace relcheck::partition {

std::pair<std::int64_t, std::int64_t> block_bounds(std::int64_t lo, std::int64_t hi, int nranks,
                                                   int rank) {
  if (hi < lo) throw Error("EmptyRange", "range " + std::to_string(lo) + ".." + std::to_string(hi) + " is empty");
  std::int64_t n = hi - lo + 1;
  if (nranks < 1 || rank < 0 || rank >= nranks || nranks > n)
    throw Error("InvalidRank", "rank " + std::to_string(rank) + " of " + std::to_string(nranks) +
                                   " over " + std::to_string(n) + " elements");
  std::int64_t q = n / nranks;
  std::int64_t rem = n % nranks;
  std::int64_t start = lo + rank * q + std::min<std::int64_t>(rank, rem);
  std::int64_t size = q + (rank < rem ? 1 : 0);
  return {start, start + size - 1};
}

bool DistributionSpec::covers(const std::string& r, const std::string& a) const {
  for (const auto& m : alignment)
    if (m.routine == r && m.array == a) return true;
  return false;
}

int DistributionSpec::owner(std::int64_t idx) const {
  for (int r = 0; r < nranks; ++r) {
    auto [l, h] = bounds(r);
    if (idx >= l && idx <= h) return r;
  }
  return -1;
}

}  // namespace relcheck::partition
