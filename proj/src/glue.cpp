#include "vfric/glue.hpp"

#include <cmath>
#include <numbers>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double collapse(double q, double flat_lo, double flat_hi) {
  if (q < flat_lo) return q - flat_lo;
  if (q > flat_hi) return q - flat_hi;
  return 0.0;
}

}  // namespace

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw DomainError("angle must be finite");
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;  // fmod rounding of values just below a multiple of 2pi
  return t;
}

ConePoint::ConePoint(double theta, double y) : y_(y) {
  if (!std::isfinite(y)) throw DomainError("cone point: y must be finite");
  theta_ = y == 0.0 ? 0.0 : normalize_angle(theta);
}

double ConePoint::theta() const {
  if (is_vertex()) throw DomainError("the vertex has no angle");
  return theta_;
}

bool operator==(const ConePoint& l, const ConePoint& r) { return cone_distance(l, r) <= 1e-12; }

GluedPoint1D project_1d(const FrictionProfile& p, double q) {
  if (!p.contains(q)) throw DomainError("project_1d: q outside [a-1, b+1]");
  return {collapse(q, p.flat_lo, p.flat_hi)};
}

GluedPoint1D project_1d(double q) { return {collapse(q, -1.0, 1.0)}; }

ConePoint project_2d(const FrictionProfile& p, double theta, double y) {
  if (!p.contains(y)) throw DomainError("project_2d: y outside [a-1, b+1]");
  return ConePoint(theta, collapse(y, p.flat_lo, p.flat_hi));
}

ConePoint project_2d(double theta, double y) { return ConePoint(theta, collapse(y, -1.0, 1.0)); }

double cone_distance(const ConePoint& p1, const ConePoint& p2) {
  if (p1.is_vertex()) return std::abs(p2.y());
  if (p2.is_vertex()) return std::abs(p1.y());
  if ((p1.y() > 0.0) != (p2.y() > 0.0)) return std::abs(p1.y()) + std::abs(p2.y());
  const double r1 = std::abs(p1.y());
  const double r2 = std::abs(p2.y());
  const double dx = r1 * std::cos(p1.theta()) - r2 * std::cos(p2.theta());
  const double dy = r1 * std::sin(p1.theta()) - r2 * std::sin(p2.theta());
  return std::hypot(dx, dy);
}

}  // namespace vfric
