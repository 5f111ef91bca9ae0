#include "stormreach/geo.hpp"

#include <cmath>
#include <string>

#include "stormreach/errors.hpp"

namespace stormreach {
namespace {

constexpr double kDeg = M_PI / 180.0;
constexpr double kMaxAbsLat = 89.5;

double wrap_deg(double d) {
  d = std::fmod(d + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

}  // namespace

PlanarFrame::PlanarFrame(double lat0_deg, double lon0_deg)
    : PlanarFrame(lat0_deg, lon0_deg, lat0_deg) {}

PlanarFrame::PlanarFrame(double lat0_deg, double lon0_deg, double standard_parallel_deg)
    : lat0_(lat0_deg), lon0_(lon0_deg), parallel_(standard_parallel_deg) {
  if (!(std::abs(parallel_) > 1e-6 && std::abs(parallel_) < kMaxAbsLat))
    throw DomainError("standard parallel must be non-zero and away from the poles");
  if (!(std::abs(lat0_) < kMaxAbsLat)) throw DomainError("projection center latitude out of range");
  const double phi1 = parallel_ * kDeg;
  n_ = std::sin(phi1);
  f_ = std::cos(phi1) * std::pow(std::tan(M_PI / 4 + phi1 / 2), n_) / n_;
  rho0_ = rho(lat0_ * kDeg);
}

double PlanarFrame::rho(double lat_rad) const {
  return kEarthRadiusKm * f_ / std::pow(std::tan(M_PI / 4 + lat_rad / 2), n_);
}

bool PlanarFrame::in_domain(GeoPoint geo) const {
  if (!std::isfinite(geo.lat) || !std::isfinite(geo.lon)) return false;
  if (std::abs(geo.lat) >= kMaxAbsLat) return false;
  return std::abs(wrap_deg(geo.lon - lon0_)) < 179.9;
}

Point2 PlanarFrame::project(GeoPoint geo) const {
  if (!in_domain(geo))
    throw DomainError("point (" + std::to_string(geo.lon) + ", " + std::to_string(geo.lat) +
                      ") outside projection domain");
  const double r = rho(geo.lat * kDeg);
  const double theta = n_ * wrap_deg(geo.lon - lon0_) * kDeg;
  return {r * std::sin(theta), rho0_ - r * std::cos(theta)};
}

GeoPoint PlanarFrame::unproject(Point2 p) const {
  const double sign = n_ > 0 ? 1.0 : -1.0;
  const double dy = rho0_ - p.y;
  const double r = sign * std::hypot(p.x, dy);
  if (r == 0.0) throw DomainError("planar point maps to the projection apex");
  const double theta = std::atan2(sign * p.x, sign * dy);
  const double lat = 2.0 * std::atan(std::pow(kEarthRadiusKm * f_ / r, 1.0 / n_)) - M_PI / 2;
  GeoPoint geo{wrap_deg(lon0_ + theta / n_ / kDeg), lat / kDeg};
  if (!in_domain(geo)) throw DomainError("planar point outside projection domain");
  return geo;
}

}  // namespace stormreach
