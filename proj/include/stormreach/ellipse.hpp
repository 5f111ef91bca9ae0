#pragma once

#include <span>

#include "stormreach/geo.hpp"

namespace stormreach {

/// {p : (p - center)^T M (p - center) <= 1} with M = [[m11, m12], [m12, m22]] positive definite.
struct Ellipse {
  Point2 center{};
  double m11{1}, m12{0}, m22{1};

  double quadratic_form(Point2 p) const {
    const double dx = p.x - center.x, dy = p.y - center.y;
    return m11 * dx * dx + 2.0 * m12 * dx * dy + m22 * dy * dy;
  }
  bool contains(Point2 p, double tolerance = 0.0) const { return quadratic_form(p) <= 1.0 + tolerance; }
  double determinant() const { return m11 * m22 - m12 * m12; }
  double area() const;
  /// Half-widths of the axis-aligned bounding box.
  double half_extent_x() const;
  double half_extent_y() const;
  /// Semi-axis lengths, major first.
  double semi_major() const;
  double semi_minor() const;
};

struct MveOptions {
  double tolerance = 1e-4;
  /// Minimum semi-axis used for degenerate inputs (one point, two points, collinear sets).
  double pad = 1.0;
  int max_iterations = 200000;
};

/// Minimum-area enclosing ellipse via Khachiyan's first-order method with away steps.
/// Every input point satisfies quadratic_form <= 1 (up to rounding); the area is
/// within a (1 + O(tolerance)) factor of optimal. Throws DomainError on empty input.
Ellipse min_volume_ellipse(std::span<const Point2> points, MveOptions options = {});

}  // namespace stormreach
