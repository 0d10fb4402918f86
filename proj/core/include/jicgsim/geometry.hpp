#pragma once

#include <span>

namespace jicgsim {

// All lengths are micrometers.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

// Axis-aligned rectangle with x0 < x1 and y0 < y1.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  // Throws InvalidArgument unless the rectangle has positive extent.
  static Rect checked(double x0, double y0, double x1, double y1);
  static Rect centered(Point center, double width, double height);

  bool valid() const { return x0 < x1 && y0 < y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  // Closed containment: points on the boundary count as inside.
  bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const;
  // True when the interiors share positive area.
  bool overlaps(const Rect& r) const;

  Rect translated(Point offset) const { return {x0 + offset.x, y0 + offset.y, x1 + offset.x, y1 + offset.y}; }
  Rect united(const Rect& r) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Fraction of `target`'s area covered by the union of `covers`, computed
// exactly by coordinate compression.
double covered_fraction(const Rect& target, std::span<const Rect> covers);

}  // namespace jicgsim
