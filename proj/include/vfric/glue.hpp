#pragma once

#include <optional>

#include "vfric/friction.hpp"

namespace vfric {

/// Point of the interval [a, b] in which the flat stretch has been collapsed
/// to the single point 0.
struct GluedPoint1D {
  double y = 0.0;
};

/// Point of the cone: either the vertex, or (theta, y) with y != 0.
/// theta is normalized to [0, 2pi) on construction.
class ConePoint {
 public:
  static ConePoint vertex() { return ConePoint(); }
  /// y == 0 gives the vertex regardless of theta.
  ConePoint(double theta, double y);

  bool is_vertex() const { return y_ == 0.0; }
  double y() const { return y_; }
  /// Angle; throws DomainError at the vertex, where it is undefined.
  double theta() const;

  /// Equal when the cone distance is at most 1e-12.
  friend bool operator==(const ConePoint& l, const ConePoint& r);

 private:
  ConePoint() = default;
  double theta_ = 0.0;
  double y_ = 0.0;
};

double normalize_angle(double theta);

/// pi(q): 0 on the flat stretch, q + 1 below it, q - 1 above it (for the
/// default stretch [-1, 1]). Throws DomainError outside [a-1, b+1].
GluedPoint1D project_1d(const FrictionProfile& p, double q);
GluedPoint1D project_1d(double q);  // default geometry: flat stretch [-1, 1], no domain check
ConePoint project_2d(const FrictionProfile& p, double theta, double y);
ConePoint project_2d(double theta, double y);

/// Same sign of y: Euclidean distance of the polar embeddings
/// (|y| cos theta, |y| sin theta). Opposite signs: route through the vertex.
double cone_distance(const ConePoint& p1, const ConePoint& p2);

}  // namespace vfric
