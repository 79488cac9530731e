#pragma once

#include <bit>
#include <cstddef>
#include <string>
#include <vector>

#include "hierops/error.hpp"

namespace hierops {

/// Half-open contiguous range of site indices [first, last).
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first; }
  bool contains(std::size_t x) const noexcept { return x >= first && x < last; }
  bool operator==(const IndexRange&) const = default;
};

/// Dyadic hierarchy on {0, ..., 2^n - 1}. Level-r blocks are the runs
/// [b 2^r, (b+1) 2^r); level 0 is the singleton partition and level n is the
/// whole volume.
class HierarchySpec {
 public:
  static constexpr unsigned kMaxDepth = 40;

  explicit HierarchySpec(unsigned depth) : depth_(depth) {
    if (depth > kMaxDepth) {
      throw ArgumentError("hierarchy depth " + std::to_string(depth) +
                          " exceeds " + std::to_string(kMaxDepth));
    }
  }

  unsigned depth() const noexcept { return depth_; }
  std::size_t volume() const noexcept { return std::size_t{1} << depth_; }
  std::size_t block_count(unsigned r) const {
    check_level(r);
    return std::size_t{1} << (depth_ - r);
  }

  std::size_t block_id(std::size_t x, unsigned r) const {
    check_site(x);
    check_level(r);
    return x >> r;
  }

  /// Smallest level at which j and k share a block; bit length of j ^ k.
  unsigned distance(std::size_t j, std::size_t k) const {
    check_site(j);
    check_site(k);
    return static_cast<unsigned>(std::bit_width(j ^ k));
  }

  IndexRange block_members(unsigned r, std::size_t b) const {
    if (b >= block_count(r)) {
      throw ArgumentError("block index " + std::to_string(b) +
                          " out of range at level " + std::to_string(r));
    }
    return {b << r, (b + 1) << r};
  }

  /// B_r(x).
  IndexRange block_of(std::size_t x, unsigned r) const {
    return block_members(r, block_id(x, r));
  }

 private:
  void check_site(std::size_t x) const {
    if (x >= volume()) {
      throw ArgumentError("site " + std::to_string(x) + " outside volume " +
                          std::to_string(volume()));
    }
  }
  void check_level(unsigned r) const {
    if (r > depth_) {
      throw ArgumentError("level " + std::to_string(r) + " exceeds depth " +
                          std::to_string(depth_));
    }
  }

  unsigned depth_;
};

/// Disjoint sets X_0 = {x}, X_r = B_r(x) \ B_{r-1}(x) peeled off around a
/// center. X_0 u ... u X_r = B_r(x) for every r.
struct SpineDecomposition {
  std::size_t center = 0;
  std::vector<IndexRange> blocks;
};

inline SpineDecomposition spine_decomposition(const HierarchySpec& h,
                                              std::size_t x) {
  SpineDecomposition out;
  out.center = x;
  out.blocks.reserve(h.depth() + 1);
  out.blocks.push_back(h.block_of(x, 0));
  for (unsigned r = 1; r <= h.depth(); ++r) {
    // In the binary hierarchy B_r(x) \ B_{r-1}(x) is the sibling block.
    const std::size_t sibling = h.block_id(x, r - 1) ^ std::size_t{1};
    out.blocks.push_back(h.block_members(r - 1, sibling));
  }
  return out;
}

}  // namespace hierops
