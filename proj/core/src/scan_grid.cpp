#include "jicgsim/scan_grid.hpp"

#include <cmath>

#include "jicgsim/errors.hpp"

namespace jicgsim {

ScanGrid ScanGrid::around(const Rect& bounds, double margin, double step) {
  if (!(margin >= 0.0)) throw InvalidArgument("scan margin must not be negative");
  ScanGrid g{{bounds.x0 - margin, bounds.y0 - margin}, {bounds.x1 + margin, bounds.y1 + margin}, step};
  g.validate();
  return g;
}

void ScanGrid::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("scan step must be positive");
  if (!(last_point.x >= first_point.x) || !(last_point.y >= first_point.y)) {
    throw InvalidArgument("scan grid last point lies before its first point");
  }
}

int ScanGrid::nx() const { return static_cast<int>(std::floor((last_point.x - first_point.x) / step + 1e-9)) + 1; }

int ScanGrid::ny() const { return static_cast<int>(std::floor((last_point.y - first_point.y) / step + 1e-9)) + 1; }

std::vector<Point> ScanGrid::points() const {
  std::vector<Point> out;
  out.reserve(size());
  for (int j = 0; j < ny(); ++j) {
    for (int i = 0; i < nx(); ++i) out.push_back(point(i, j));
  }
  return out;
}

}  // namespace jicgsim
