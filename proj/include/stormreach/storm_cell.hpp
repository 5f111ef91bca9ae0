#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stormreach/geo.hpp"
#include "stormreach/nowcast.hpp"

namespace stormreach {

/// Planar state of one storm cell: center, rectangular extremities, size and motion.
struct StormCellState {
  Point2 center{};
  double west{};  // x of the western extremity, km
  double east{};
  double south{};  // y of the southern extremity, km
  double north{};
  int pixels{1};
  double heading_rad{};  // counter-clockwise from East
  double speed_kmh{};

  double width() const { return east - west; }
  double height() const { return north - south; }
  bool contains(Point2 p) const { return p.x >= west && p.x <= east && p.y >= south && p.y <= north; }
};

/// A cell at issue time together with its projected center forecasts.
struct PlanarCell {
  int id{};
  StormCellState state{};
  std::array<std::optional<Point2>, kMaxForecastHorizons> forecasts{};

  /// Center forecast at horizon `tau` (0 = current center). Missing horizons are
  /// extrapolated linearly from the nearest available ones; with no forecasts at
  /// all the cell moves with its reported heading and speed.
  Point2 forecast_center(int tau) const;
};

/// DIRN (degrees clockwise from North) to radians counter-clockwise from East, in (-pi, pi].
double heading_from_dirn(double dirn_deg);
double dirn_from_heading(double heading_rad);

double wrap_angle(double rad);

PlanarCell to_planar(const StormCellObservation& obs, const PlanarFrame& frame);
std::vector<PlanarCell> to_planar(const NowcastFile& file, const PlanarFrame& frame);

}  // namespace stormreach
