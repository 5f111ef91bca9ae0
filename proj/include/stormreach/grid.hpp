#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "stormreach/geo.hpp"

namespace stormreach {

/// Cell-centered planar grid. Cell (ix, iy) covers [x_min + ix dx, x_min + (ix+1) dx) and
/// likewise in y; values live at cell centers.
struct PlaneGrid {
  double x_min{}, x_max{};
  int n_x{};
  double y_min{}, y_max{};
  int n_y{};

  double dx() const { return (x_max - x_min) / n_x; }
  double dy() const { return (y_max - y_min) / n_y; }
  double x_center(int ix) const { return x_min + (ix + 0.5) * dx(); }
  double y_center(int iy) const { return y_min + (iy + 0.5) * dy(); }
  std::size_t size() const { return static_cast<std::size_t>(n_x) * static_cast<std::size_t>(n_y); }
  /// Row-major, y outer.
  std::size_t flat(int ix, int iy) const { return static_cast<std::size_t>(iy) * n_x + ix; }

  bool contains(Point2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
  /// Containing cell, or nullopt outside the grid.
  std::optional<std::size_t> cell_of(Point2 p) const;
  int x_index(double x) const;
  int y_index(double y) const;

  /// Throws DomainError unless both dimensions have >= 2 cells and positive extent.
  void validate() const;

  friend bool operator==(const PlaneGrid&, const PlaneGrid&) = default;
};

/// (x, y, heading) state grid plus time discretization. Heading cells are centered at
/// -pi + k dlambda and wrap periodically.
struct GridSpec {
  PlaneGrid plane{};
  int n_heading{};
  double dt_min{2.0};
  int steps{};

  double dheading() const { return 2.0 * M_PI / n_heading; }
  double heading_center(int k) const { return -M_PI + k * dheading(); }
  int heading_index(double heading_rad) const;

  std::size_t num_states() const { return plane.size() * static_cast<std::size_t>(n_heading); }
  std::size_t state_index(int ix, int iy, int ik) const {
    return plane.flat(ix, iy) * static_cast<std::size_t>(n_heading) + static_cast<std::size_t>(ik);
  }
  std::optional<std::size_t> state_of(double x, double y, double heading_rad) const;

  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace stormreach
