#include "stormreach/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "stormreach/errors.hpp"

namespace stormreach {
namespace {

Ellipse from_axes(Point2 center, Eigen::Vector2d major_dir, double a, double b) {
  // M = R diag(1/a^2, 1/b^2) R^T
  const double c = major_dir.x(), s = major_dir.y();
  const double ia = 1.0 / (a * a), ib = 1.0 / (b * b);
  return {center, c * c * ia + s * s * ib, c * s * (ia - ib), s * s * ia + c * c * ib};
}

// Scales M so the largest quadratic form over the points is exactly 1.
void tighten(Ellipse& e, std::span<const Point2> pts) {
  double worst = 0;
  for (const auto& p : pts) worst = std::max(worst, e.quadratic_form(p));
  if (worst <= 0) return;
  e.m11 /= worst;
  e.m12 /= worst;
  e.m22 /= worst;
}

}  // namespace

double Ellipse::area() const { return M_PI / std::sqrt(determinant()); }
double Ellipse::half_extent_x() const { return std::sqrt(m22 / determinant()); }
double Ellipse::half_extent_y() const { return std::sqrt(m11 / determinant()); }

double Ellipse::semi_major() const {
  const double tr = m11 + m22;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (m11 - m22) * (m11 - m22) + m12 * m12));
  return 1.0 / std::sqrt(0.5 * tr - disc);
}

double Ellipse::semi_minor() const {
  const double tr = m11 + m22;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (m11 - m22) * (m11 - m22) + m12 * m12));
  return 1.0 / std::sqrt(0.5 * tr + disc);
}

Ellipse min_volume_ellipse(std::span<const Point2> points, MveOptions options) {
  if (points.empty()) throw DomainError("minimum-volume ellipse needs at least one point");
  const std::size_t n = points.size();

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += Eigen::Vector2d(p.x, p.y);
  mean /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lmax = eig.eigenvalues()(1);
  const double lmin = eig.eigenvalues()(0);

  if (lmax <= 0.0) return from_axes({mean.x(), mean.y()}, {1, 0}, options.pad, options.pad);

  if (lmin <= 1e-12 * lmax) {
    // Collinear (includes two points): stretch along the line, pad across it.
    const Eigen::Vector2d dir = eig.eigenvectors().col(1);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : points) {
      const double t = (Eigen::Vector2d(p.x, p.y) - mean).dot(dir);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    const Eigen::Vector2d c = mean + dir * (0.5 * (lo + hi));
    Ellipse e = from_axes({c.x(), c.y()}, dir, std::max(0.5 * (hi - lo), options.pad), options.pad);
    // Residual off-line scatter can only be rounding noise here; make containment exact.
    double worst = 0;
    for (const auto& p : points) worst = std::max(worst, e.quadratic_form(p));
    if (worst > 1.0) tighten(e, points);
    return e;
  }

  // Work in centered, scaled coordinates for conditioning.
  const double scale = std::sqrt(lmax);
  Eigen::Matrix<double, 3, Eigen::Dynamic> q(3, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    q(0, static_cast<Eigen::Index>(i)) = (points[i].x - mean.x()) / scale;
    q(1, static_cast<Eigen::Index>(i)) = (points[i].y - mean.y()) / scale;
    q(2, static_cast<Eigen::Index>(i)) = 1.0;
  }
  constexpr double d = 2.0;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::Matrix3d x = q * u.asDiagonal() * q.transpose();
    const Eigen::Matrix3d xinv = x.inverse();
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = q.col(i).dot(xinv * q.col(i));

    Eigen::Index jp = 0, jm = -1;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g(i) > g(jp)) jp = i;
      if (u(i) > 0 && (jm < 0 || g(i) < g(jm))) jm = i;
    }
    const double eps_plus = g(jp) / (d + 1) - 1.0;
    const double eps_minus = 1.0 - g(jm) / (d + 1);
    if (eps_plus <= options.tolerance && eps_minus <= options.tolerance) break;

    if (eps_plus > eps_minus) {
      const double beta = (g(jp) - (d + 1)) / ((d + 1) * (g(jp) - 1.0));
      u *= (1.0 - beta);
      u(jp) += beta;
    } else {
      double beta = (g(jm) - (d + 1)) / ((d + 1) * (g(jm) - 1.0));
      beta = std::max(beta, -u(jm) / (1.0 - u(jm)));
      u *= (1.0 - beta);
      u(jm) += beta;
      if (u(jm) < 1e-300) u(jm) = 0.0;
    }
  }

  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d p = q.block<2, 1>(0, static_cast<Eigen::Index>(i));
    c += u(static_cast<Eigen::Index>(i)) * p;
    s += u(static_cast<Eigen::Index>(i)) * p * p.transpose();
  }
  s -= c * c.transpose();
  const Eigen::Matrix2d a = s.inverse() / d / (scale * scale);
  const Eigen::Vector2d center = mean + c * scale;
  Ellipse e{{center.x(), center.y()}, a(0, 0), 0.5 * (a(0, 1) + a(1, 0)), a(1, 1)};
  tighten(e, points);
  STORMREACH_ASSERT(e.determinant() > 0 && e.m11 > 0, "minimum-volume ellipse is not positive definite");
  return e;
}

}  // namespace stormreach
