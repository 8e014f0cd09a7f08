#include "relcheck/compare/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "relcheck/error.hpp"

namespace relcheck::compare {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::GlobalChecksum: return "global";
    case Mode::PartialChecksum: return "partial";
    case Mode::ElementWise: return "element";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "global") return Mode::GlobalChecksum;
  if (s == "partial") return Mode::PartialChecksum;
  if (s == "element") return Mode::ElementWise;
  throw Error("BadMode", "comparison mode must be global, partial or element, got '" + s + "'");
}

void ComparisonMode::validate() const {
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
    throw Error("BadTolerance", "tolerance must be a finite non-negative number");
}

bool ComparisonMode::within(double serial, double parallel) const {
  double t = relative ? tolerance * std::max(1.0, std::fabs(serial)) : tolerance;
  double d = std::fabs(serial - parallel);
  // NaN on either side never compares equal unless both are NaN with the same bits.
  if (std::isnan(d)) return std::isnan(serial) && std::isnan(parallel);
  return d <= t;
}

double checksum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double checksum(const ArrayValue& a) { return checksum(std::span<const double>(a.data)); }

namespace {

// Calls f(offset) for every element whose `dim` subscript lies in lo..hi, in storage order.
template <class F>
void for_slice(const ArrayValue& a, int dim, std::int64_t lo, std::int64_t hi, F&& f) {
  if (dim < 1 || dim > int(a.rank()) || lo < a.dims[dim - 1].lo || hi > a.dims[dim - 1].hi || lo > hi)
    throw Error("BoundsMismatch", "slice " + std::to_string(lo) + ":" + std::to_string(hi) + " of dimension " +
                                      std::to_string(dim) + " outside bounds " + bounds_text(a.dims));
  std::size_t inner = 1;
  for (int k = 0; k < dim - 1; ++k) inner *= std::size_t(a.dims[k].size());
  std::size_t extent = std::size_t(a.dims[dim - 1].size());
  std::size_t outer = a.data.size() / (inner * extent);
  std::size_t first = std::size_t(lo - a.dims[dim - 1].lo);
  std::size_t count = std::size_t(hi - lo + 1);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t m = first; m < first + count; ++m)
      for (std::size_t i = 0; i < inner; ++i) f((o * extent + m) * inner + i);
}

std::vector<std::int64_t> subscripts(const ArrayValue& a, std::size_t off) {
  std::vector<std::int64_t> idx(a.rank());
  for (std::size_t k = 0; k < a.rank(); ++k) {
    std::size_t n = std::size_t(a.dims[k].size());
    idx[k] = a.dims[k].lo + std::int64_t(off % n);
    off /= n;
  }
  return idx;
}

// Contributions indexed by rank; MissingRank / OverlapDetected / InvalidRank.
std::vector<const Contribution*> by_rank(const std::vector<Contribution>& cs, const partition::DistributionSpec& dist) {
  std::vector<const Contribution*> out(std::size_t(dist.nranks), nullptr);
  for (const auto& c : cs) {
    if (c.rank < 0 || c.rank >= dist.nranks)
      throw Error("InvalidRank", "contribution from rank " + std::to_string(c.rank) + " of " +
                                     std::to_string(dist.nranks));
    if (out[c.rank]) throw Error("OverlapDetected", "two contributions from rank " + std::to_string(c.rank));
    out[c.rank] = &c;
  }
  for (int r = 0; r < dist.nranks; ++r)
    if (!out[r]) throw Error("MissingRank", "no contribution from rank " + std::to_string(r));
  return out;
}

void check_bounds(const Contribution& c, const partition::DistributionSpec& dist) {
  auto [lo, hi] = dist.bounds(c.rank);
  if (c.lo != lo || c.hi != hi)
    throw Error("BoundsMismatch", "rank " + std::to_string(c.rank) + " contributed " + std::to_string(c.lo) + ":" +
                                      std::to_string(c.hi) + ", distribution owns " + std::to_string(lo) + ":" +
                                      std::to_string(hi));
}

}  // namespace

double checksum(const ArrayValue& a, int dim, std::int64_t lo, std::int64_t hi) {
  double s = 0.0;
  for_slice(a, dim, lo, hi, [&](std::size_t off) { s += a.data[off]; });
  return s;
}

ArrayValue slice(const ArrayValue& a, int dim, std::int64_t lo, std::int64_t hi) {
  std::vector<lang::Extent> dims = a.dims;
  if (dim >= 1 && dim <= int(dims.size())) dims[dim - 1] = {lo, hi};
  ArrayValue out;
  out.dims = dims;
  out.data.reserve(a.size());
  for_slice(a, dim, lo, hi, [&](std::size_t off) { out.data.push_back(a.data[off]); });
  return out;
}

Contribution contribute(const ArrayValue& local, const partition::DistributionSpec& dist, int rank, bool with_block) {
  Contribution c;
  c.rank = rank;
  std::tie(c.lo, c.hi) = dist.bounds(rank);
  c.checksum = checksum(local, dist.dim, c.lo, c.hi);
  if (with_block) c.block = slice(local, dist.dim, c.lo, c.hi);
  return c;
}

double checksum(const ArrayValue& a, const partition::DistributionSpec& dist) {
  double sum = 0.0;
  for (int r = 0; r < dist.nranks; ++r) {
    auto [lo, hi] = dist.bounds(r);
    sum += checksum(a, dist.dim, lo, hi);
  }
  return sum;
}

Verdict compare_global(double serial_ck, const std::vector<double>& partials, const ComparisonMode& m) {
  m.validate();
  double sum = 0.0;
  for (double p : partials) sum += p;
  Verdict v;
  v.delta = serial_ck - sum;
  v.pass = m.within(serial_ck, sum);
  return v;
}

Verdict compare_global(double serial_ck, const std::vector<double>& partials, double tol) {
  return compare_global(serial_ck, partials, ComparisonMode{Mode::GlobalChecksum, tol, false});
}

Verdict compare_partial(const ArrayValue& serial, const std::vector<Contribution>& contributions,
                        const partition::DistributionSpec& dist, const ComparisonMode& m) {
  m.validate();
  auto ranks = by_rank(contributions, dist);
  Verdict v;
  v.rank_pass.assign(std::size_t(dist.nranks), true);
  for (int r = 0; r < dist.nranks; ++r) {
    const Contribution& c = *ranks[r];
    check_bounds(c, dist);
    double s = checksum(serial, dist.dim, c.lo, c.hi);
    if (!m.within(s, c.checksum)) {
      v.rank_pass[r] = false;
      if (v.pass) {
        v.pass = false;
        v.failing_rank = r;
        v.delta = s - c.checksum;
      }
    }
  }
  return v;
}

Verdict compare_element(const ArrayValue& serial, const std::vector<Contribution>& contributions,
                        const partition::DistributionSpec& dist, const ComparisonMode& m) {
  m.validate();
  auto ranks = by_rank(contributions, dist);
  Verdict v;
  for (int r = 0; r < dist.nranks; ++r) {
    const Contribution& c = *ranks[r];
    check_bounds(c, dist);
    if (!c.block) throw Error("BoundsMismatch", "rank " + std::to_string(r) + " sent no element block");
    ArrayValue expect = slice(serial, dist.dim, c.lo, c.hi);
    if (expect.dims != c.block->dims || expect.data.size() != c.block->data.size())
      throw Error("BoundsMismatch", "rank " + std::to_string(r) + " block has bounds " + bounds_text(c.block->dims) +
                                        ", expected " + bounds_text(expect.dims));
    for (std::size_t k = 0; k < expect.data.size(); ++k)
      if (!m.within(expect.data[k], c.block->data[k]))
        v.diffs.push_back({subscripts(expect, k), expect.data[k], c.block->data[k], r});
  }
  // Global index order: last subscript most significant, as in storage.
  std::sort(v.diffs.begin(), v.diffs.end(), [](const Diff& a, const Diff& b) {
    return std::lexicographical_compare(a.index.rbegin(), a.index.rend(), b.index.rbegin(), b.index.rend());
  });
  v.pass = v.diffs.empty();
  return v;
}

std::vector<Contribution> scatter(const ArrayValue& global, const partition::DistributionSpec& dist) {
  std::vector<Contribution> out;
  for (int r = 0; r < dist.nranks; ++r) out.push_back(contribute(global, dist, r, true));
  return out;
}

ArrayValue reassemble(const std::vector<Contribution>& contributions, const partition::DistributionSpec& dist) {
  auto ranks = by_rank(contributions, dist);
  std::vector<lang::Extent> dims;
  for (int r = 0; r < dist.nranks; ++r) {
    const Contribution& c = *ranks[r];
    check_bounds(c, dist);
    if (!c.block) throw Error("BoundsMismatch", "rank " + std::to_string(r) + " sent no element block");
    std::vector<lang::Extent> d = c.block->dims;
    if (dist.dim < 1 || dist.dim > int(d.size()))
      throw Error("BoundsMismatch", "distributed dimension " + std::to_string(dist.dim) + " outside block rank");
    d[dist.dim - 1] = {dist.lo, dist.hi};
    if (r == 0) dims = d;
    else if (d != dims)
      throw Error("BoundsMismatch", "rank " + std::to_string(r) + " block bounds " + bounds_text(c.block->dims) +
                                        " disagree with rank 0");
  }
  ArrayValue out(dims);
  for (int r = 0; r < dist.nranks; ++r) {
    const Contribution& c = *ranks[r];
    std::size_t k = 0;
    for_slice(out, dist.dim, c.lo, c.hi, [&](std::size_t off) { out.data[off] = c.block->data[k++]; });
  }
  return out;
}

bool bit_equal(const ArrayValue& a, const ArrayValue& b) {
  return a.dims == b.dims && a.data.size() == b.data.size() &&
         (a.data.empty() || std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
}

}  // namespace relcheck::compare
