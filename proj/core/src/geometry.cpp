#include "jicgsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "jicgsim/errors.hpp"

namespace jicgsim {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Rect Rect::checked(double x0, double y0, double x1, double y1) {
  Rect r{x0, y0, x1, y1};
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1) || !r.valid()) {
    std::ostringstream msg;
    msg << "degenerate rectangle [" << x0 << ", " << y0 << ", " << x1 << ", " << y1 << "]";
    throw InvalidArgument(msg.str());
  }
  return r;
}

Rect Rect::centered(Point center, double width, double height) {
  return checked(center.x - 0.5 * width, center.y - 0.5 * height, center.x + 0.5 * width,
                 center.y + 0.5 * height);
}

bool Rect::contains(const Rect& r) const {
  return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
}

bool Rect::overlaps(const Rect& r) const {
  return std::min(x1, r.x1) > std::max(x0, r.x0) && std::min(y1, r.y1) > std::max(y0, r.y0);
}

Rect Rect::united(const Rect& r) const {
  return {std::min(x0, r.x0), std::min(y0, r.y0), std::max(x1, r.x1), std::max(y1, r.y1)};
}

double covered_fraction(const Rect& target, std::span<const Rect> covers) {
  std::vector<Rect> clipped;
  for (const Rect& c : covers) {
    Rect k{std::max(c.x0, target.x0), std::max(c.y0, target.y0), std::min(c.x1, target.x1),
           std::min(c.y1, target.y1)};
    if (k.valid()) clipped.push_back(k);
  }
  if (clipped.empty()) return 0.0;

  std::vector<double> xs{target.x0, target.x1};
  std::vector<double> ys{target.y0, target.y1};
  for (const Rect& k : clipped) {
    xs.insert(xs.end(), {k.x0, k.x1});
    ys.insert(ys.end(), {k.y0, k.y1});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double covered = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const Point mid{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      const bool hit = std::any_of(clipped.begin(), clipped.end(),
                                   [&](const Rect& k) { return k.contains(mid); });
      if (hit) covered += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return std::clamp(covered / target.area(), 0.0, 1.0);
}

}  // namespace jicgsim
