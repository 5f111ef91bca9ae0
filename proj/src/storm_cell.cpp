#include "stormreach/storm_cell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace stormreach {

double wrap_angle(double rad) {
  double r = std::remainder(rad, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

double heading_from_dirn(double dirn_deg) { return wrap_angle(M_PI / 2 - dirn_deg * M_PI / 180.0); }

double dirn_from_heading(double heading_rad) {
  double d = std::fmod(90.0 - heading_rad * 180.0 / M_PI, 360.0);
  if (d < 0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

Point2 PlanarCell::forecast_center(int tau) const {
  if (tau <= 0) return state.center;
  if (tau <= kMaxForecastHorizons && forecasts[tau - 1]) return *forecasts[tau - 1];

  auto at = [&](int h) { return h == 0 ? state.center : *forecasts[h - 1]; };
  int nearest = 0;
  for (int h = 1; h <= kMaxForecastHorizons; ++h)
    if (forecasts[h - 1] && std::abs(h - tau) < std::abs(nearest - tau)) nearest = h;

  if (nearest == 0) {
    const double dist = state.speed_kmh * (kNowcastStepMinutes * tau / 60.0);
    return {state.center.x + dist * std::cos(state.heading_rad), state.center.y + dist * std::sin(state.heading_rad)};
  }
  int anchor = 0;
  for (int h = nearest - 1; h >= 1; --h)
    if (forecasts[h - 1]) {
      anchor = h;
      break;
    }
  const Point2 a = at(anchor);
  const Point2 b = at(nearest);
  const double f = static_cast<double>(tau - anchor) / (nearest - anchor);
  return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

PlanarCell to_planar(const StormCellObservation& obs, const PlanarFrame& frame) {
  PlanarCell cell;
  cell.id = obs.id;
  auto& s = cell.state;
  s.center = frame.project(obs.center);
  s.west = std::min(frame.project({obs.west, obs.center.lat}).x, s.center.x);
  s.east = std::max(frame.project({obs.east, obs.center.lat}).x, s.center.x);
  s.south = std::min(frame.project({obs.center.lon, obs.south}).y, s.center.y);
  s.north = std::max(frame.project({obs.center.lon, obs.north}).y, s.center.y);
  s.pixels = obs.pixels;
  s.heading_rad = heading_from_dirn(obs.heading_deg);
  s.speed_kmh = obs.speed_kmh;
  for (int k = 0; k < kMaxForecastHorizons; ++k)
    if (obs.center_forecasts[k]) cell.forecasts[k] = frame.project(*obs.center_forecasts[k]);
  return cell;
}

std::vector<PlanarCell> to_planar(const NowcastFile& file, const PlanarFrame& frame) {
  std::vector<PlanarCell> out;
  out.reserve(file.cells.size());
  for (const auto& c : file.cells) out.push_back(to_planar(c, frame));
  return out;
}

}  // namespace stormreach
