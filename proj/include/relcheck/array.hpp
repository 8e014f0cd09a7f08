#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relcheck/lang/ast.hpp"

namespace relcheck {

// Dense real array with declared per-dimension bounds, stored column-major
// (first subscript varies fastest) as in Fortran.
struct ArrayValue {
  std::vector<lang::Extent> dims;
  std::vector<double> data;

  ArrayValue() = default;
  explicit ArrayValue(std::vector<lang::Extent> d) : dims(std::move(d)) {
    std::size_t n = 1;
    for (const auto& e : dims) n *= static_cast<std::size_t>(e.size());
    data.assign(n, 0.0);
  }

  std::size_t rank() const { return dims.size(); }
  std::size_t size() const { return data.size(); }

  // Storage offset of a subscript tuple, or nullopt when out of bounds.
  std::optional<std::size_t> offset(const std::int64_t* idx, std::size_t n) const {
    if (n != dims.size()) return std::nullopt;
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (idx[k] < dims[k].lo || idx[k] > dims[k].hi) return std::nullopt;
      off += static_cast<std::size_t>(idx[k] - dims[k].lo) * stride;
      stride *= static_cast<std::size_t>(dims[k].size());
    }
    return off;
  }

  double& at(std::int64_t i) { return data[static_cast<std::size_t>(i - dims[0].lo)]; }
  double at(std::int64_t i) const { return data[static_cast<std::size_t>(i - dims[0].lo)]; }
  double& at(std::int64_t i, std::int64_t j) {
    return data[static_cast<std::size_t>((i - dims[0].lo) + (j - dims[1].lo) * dims[0].size())];
  }
  double at(std::int64_t i, std::int64_t j) const {
    return data[static_cast<std::size_t>((i - dims[0].lo) + (j - dims[1].lo) * dims[0].size())];
  }

  bool operator==(const ArrayValue&) const = default;
};

// "lo:hi,lo:hi" rendering of the declared bounds.
std::string bounds_text(const std::vector<lang::Extent>& dims);

}  // namespace relcheck
