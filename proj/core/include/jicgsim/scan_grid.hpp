#pragma once

#include <cstddef>
#include <vector>

#include "jicgsim/geometry.hpp"

namespace jicgsim {

inline constexpr double kDefaultScanStep = 0.5;
inline constexpr double kDefaultScanMargin = 2.0;

// Shot centres from first_point to last_point inclusive, step apart on
// both axes. Index i runs along x, j along y.
struct ScanGrid {
  Point first_point;
  Point last_point;
  double step = kDefaultScanStep;

  // Bounds grown by margin on every side.
  static ScanGrid around(const Rect& bounds, double margin = kDefaultScanMargin, double step = kDefaultScanStep);

  void validate() const;
  int nx() const;
  int ny() const;
  std::size_t size() const { return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny()); }
  Point point(int i, int j) const { return {first_point.x + i * step, first_point.y + j * step}; }
  // Row-major, j outer.
  std::vector<Point> points() const;
  Rect extent() const { return {first_point.x, first_point.y, last_point.x, last_point.y}; }

  friend bool operator==(const ScanGrid&, const ScanGrid&) = default;
};

}  // namespace jicgsim
