#pragma once

#include <cstddef>
#include <vector>

#include "vfric/glue.hpp"
#include "vfric/rng.hpp"
#include "vfric/scale.hpp"
#include "vfric/sde.hpp"

namespace vfric {

struct LimitPath1D {
  std::vector<double> times;
  std::vector<double> y;
  bool stopped = false;
  Level boundary = Level::none;  // lower = a, upper = b
};

struct LimitPathCone {
  std::vector<double> times;
  std::vector<ConePoint> points;
  std::vector<double> clock;           // sum of dt / lambda~^2 over steps off the vertex
  std::vector<double> vertex_visits;   // times of the steps that touched the vertex
  bool stopped = false;
  Level boundary = Level::none;
};

/// Limit of the projected 1-d process: X = u~(y) is a Brownian motion
/// stopped at u~(a), u~(b). The gluing condition makes 0 invisible in this
/// coordinate, so the path crosses it freely. Requires zero drift.
LimitPath1D simulate_limit_1d(const ProjectedScale& ps, double y0, double T, double dt, RngStream& y_noise,
                              std::size_t record_every = 1);

/// Limit cone process: radial part as in simulate_limit_1d; the angle gets
/// N(0, dt / lambda~(y)^2) increments off the vertex and is redrawn
/// uniformly on [0, 2pi) on every step whose natural-scale path touches or
/// straddles 0. A start at the vertex also draws a uniform angle.
LimitPathCone simulate_limit_cone(const ProjectedScale& ps, const ConePoint& p0, double T, double dt,
                                  RngStream& y_noise, RngStream& theta_noise, std::size_t record_every = 1);

struct ConeExit {
  double time = 0.0;
  ConePoint point = ConePoint::vertex();
  std::size_t vertex_visits = 0;
};

/// First exit of the limit cone process from {|y~| < delta}; the exit point
/// is snapped to |y~| = delta.
ConeExit limit_cone_exit(const ProjectedScale& ps, const ConePoint& p0, double delta, double dt, RngStream& y_noise,
                         RngStream& theta_noise);

}  // namespace vfric
