#include "stormreach/grid.hpp"

#include <algorithm>

#include "stormreach/errors.hpp"
#include "stormreach/storm_cell.hpp"

namespace stormreach {

int PlaneGrid::x_index(double x) const { return std::clamp(static_cast<int>(std::floor((x - x_min) / dx())), 0, n_x - 1); }
int PlaneGrid::y_index(double y) const { return std::clamp(static_cast<int>(std::floor((y - y_min) / dy())), 0, n_y - 1); }

std::optional<std::size_t> PlaneGrid::cell_of(Point2 p) const {
  if (!contains(p)) return std::nullopt;
  return flat(x_index(p.x), y_index(p.y));
}

void PlaneGrid::validate() const {
  if (n_x < 2 || n_y < 2) throw DomainError("grid needs at least 2 cells per dimension");
  if (!(x_max > x_min) || !(y_max > y_min)) throw DomainError("grid extent must be positive");
}

int GridSpec::heading_index(double heading_rad) const {
  const double u = (wrap_angle(heading_rad) + M_PI) / dheading();
  int k = static_cast<int>(std::lround(u)) % n_heading;
  if (k < 0) k += n_heading;
  return k;
}

std::optional<std::size_t> GridSpec::state_of(double x, double y, double heading_rad) const {
  if (!plane.contains({x, y})) return std::nullopt;
  return state_index(plane.x_index(x), plane.y_index(y), heading_index(heading_rad));
}

void GridSpec::validate() const {
  plane.validate();
  if (n_heading < 2) throw DomainError("heading grid needs at least 2 cells");
  if (!(dt_min > 0)) throw DomainError("time step must be positive");
  if (steps < 0) throw DomainError("horizon steps must be non-negative");
}

}  // namespace stormreach
