#pragma once

#include <limits>

#include "hierops/error.hpp"

namespace hierops {

/// Closed energy interval [lo, hi].
struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;

  EnergyWindow() = default;
  EnergyWindow(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) throw ArgumentError("energy window needs lo <= hi");
  }
  static EnergyWindow everything() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  static EnergyWindow around(double center, double halfwidth) {
    return {center - halfwidth, center + halfwidth};
  }
  bool contains(double e) const noexcept { return e >= lo && e <= hi; }
};

}  // namespace hierops
