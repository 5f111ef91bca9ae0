#pragma once

namespace stormreach {

struct GeoPoint {
  double lon{};  // degrees
  double lat{};  // degrees

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Point2 {
  double x{};  // km
  double y{};  // km

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Spherical Lambert conformal conic with a single standard parallel.
/// Planar coordinates are km relative to the projection center.
class PlanarFrame {
 public:
  static constexpr double kEarthRadiusKm = 6371.0088;

  /// Standard parallel defaults to the center latitude.
  PlanarFrame(double lat0_deg = 38.0, double lon0_deg = -98.0);
  PlanarFrame(double lat0_deg, double lon0_deg, double standard_parallel_deg);

  double lat0() const { return lat0_; }
  double lon0() const { return lon0_; }
  double standard_parallel() const { return parallel_; }

  bool in_domain(GeoPoint geo) const;

  /// Throws DomainError outside the valid domain (poles, antimeridian of lon0).
  Point2 project(GeoPoint geo) const;
  GeoPoint unproject(Point2 p) const;

 private:
  double rho(double lat_rad) const;

  double lat0_;
  double lon0_;
  double parallel_;
  double n_;
  double f_;
  double rho0_;
};

}  // namespace stormreach
