#include "vfric/limitproc.hpp"

#include <cmath>
#include <numbers>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_model_case(const ProjectedScale& ps) {
  if (ps.profile().has_drift()) {
    throw UnsupportedSchemeError("limit sampler needs zero drift (the natural-scale identity v~ = 2 u~)");
  }
}

void check_inputs(const ProjectedScale& ps, double y0, double T, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(T >= 0.0)) throw DomainError("horizon T must be nonnegative");
  if (y0 < ps.a() || y0 > ps.b()) throw DomainError("start outside [a, b]");
}

std::size_t step_count(double T, double dt) {
  const double n = std::ceil(T / dt - 1e-9);
  if (n > static_cast<double>(kMaxSteps)) throw RunawayError("path needs more than the hard step cap");
  return static_cast<std::size_t>(std::max(0.0, n));
}

bool touches_zero(double x, double xn) { return x == 0.0 || xn == 0.0 || (x < 0.0) != (xn < 0.0); }

}  // namespace

LimitPath1D simulate_limit_1d(const ProjectedScale& ps, double y0, double T, double dt, RngStream& y_noise,
                              std::size_t record_every) {
  require_model_case(ps);
  check_inputs(ps, y0, T, dt);
  if (record_every == 0) record_every = 1;
  const double x_lo = ps.u_tilde_min();
  const double x_hi = ps.u_tilde_max();
  const std::size_t n = step_count(T, dt);
  const double sqrt_dt = std::sqrt(dt);

  LimitPath1D path;
  path.times.push_back(0.0);
  path.y.push_back(y0);
  double x = ps.u_tilde(y0);
  if (x <= x_lo || x >= x_hi) {
    path.stopped = true;
    path.boundary = x <= x_lo ? Level::lower : Level::upper;
    return path;
  }
  for (std::size_t k = 1; k <= n; ++k) {
    const double h = (k == n) ? T - static_cast<double>(n - 1) * dt : dt;
    const double xn = x + ((k == n) ? std::sqrt(h) : sqrt_dt) * y_noise.normal();
    if (xn <= x_lo || xn >= x_hi) {
      const bool low = xn <= x_lo;
      const double f = ((low ? x_lo : x_hi) - x) / (xn - x);
      path.times.push_back(static_cast<double>(k - 1) * dt + f * h);
      path.y.push_back(low ? ps.a() : ps.b());
      path.stopped = true;
      path.boundary = low ? Level::lower : Level::upper;
      return path;
    }
    x = xn;
    if (k % record_every == 0 || k == n) {
      path.times.push_back(k == n ? T : static_cast<double>(k) * dt);
      path.y.push_back(ps.invert_u_tilde(x));
    }
  }
  return path;
}

namespace {

// Shared stepping for the cone sampler. Returns false once stopped.
struct ConeWalker {
  const ProjectedScale& ps;
  RngStream& y_noise;
  RngStream& theta_noise;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // meaningful off the vertex
  double clock = 0.0;

  void start(const ConePoint& p0) {
    y = p0.y();
    x = ps.u_tilde(y);
    theta = p0.is_vertex() ? kTwoPi * theta_noise.uniform() : p0.theta();
  }

  // Advances by h; returns true when the step touched the vertex.
  bool step(double sqrt_h, double& xn_out, double& dtheta_out, double& rate_out) {
    const double xn = x + sqrt_h * y_noise.normal();
    const double z = theta_noise.normal();
    xn_out = xn;
    if (touches_zero(x, xn)) {
      rate_out = 0.0;
      dtheta_out = 0.0;
      return true;
    }
    const double lt = ps.lambda_tilde(y);
    rate_out = 1.0 / (lt * lt);
    dtheta_out = std::sqrt(rate_out) * sqrt_h * z;
    return false;
  }
};

}  // namespace

LimitPathCone simulate_limit_cone(const ProjectedScale& ps, const ConePoint& p0, double T, double dt,
                                  RngStream& y_noise, RngStream& theta_noise, std::size_t record_every) {
  require_model_case(ps);
  check_inputs(ps, p0.y(), T, dt);
  if (record_every == 0) record_every = 1;
  const double x_lo = ps.u_tilde_min();
  const double x_hi = ps.u_tilde_max();
  const std::size_t n = step_count(T, dt);
  const double sqrt_dt = std::sqrt(dt);

  ConeWalker w{ps, y_noise, theta_noise};
  w.start(p0);
  LimitPathCone path;
  auto record = [&](double t) {
    path.times.push_back(t);
    path.points.emplace_back(w.theta, w.y);
    path.clock.push_back(w.clock);
  };
  record(0.0);
  if (p0.is_vertex()) path.vertex_visits.push_back(0.0);

  for (std::size_t k = 1; k <= n; ++k) {
    const double h = (k == n) ? T - static_cast<double>(n - 1) * dt : dt;
    const double sqrt_h = (k == n) ? std::sqrt(h) : sqrt_dt;
    double xn = 0.0, dtheta = 0.0, rate = 0.0;
    const bool at_vertex = w.step(sqrt_h, xn, dtheta, rate);
    const double t_prev = static_cast<double>(k - 1) * dt;
    if (xn <= x_lo || xn >= x_hi) {
      const bool low = xn <= x_lo;
      const double f = ((low ? x_lo : x_hi) - w.x) / (xn - w.x);
      if (at_vertex) {
        w.theta = kTwoPi * theta_noise.uniform();
        path.vertex_visits.push_back(t_prev + f * h);
      } else {
        w.theta += f * dtheta;
        w.clock += f * rate * h;
      }
      w.x = low ? x_lo : x_hi;
      w.y = low ? ps.a() : ps.b();
      record(t_prev + f * h);
      path.stopped = true;
      path.boundary = low ? Level::lower : Level::upper;
      return path;
    }
    if (at_vertex) {
      w.theta = kTwoPi * theta_noise.uniform();
      path.vertex_visits.push_back(t_prev + h);
    } else {
      w.theta += dtheta;
      w.clock += rate * h;
    }
    w.x = xn;
    w.y = ps.invert_u_tilde(xn);
    if (k % record_every == 0 || k == n) record(k == n ? T : static_cast<double>(k) * dt);
  }
  return path;
}

ConeExit limit_cone_exit(const ProjectedScale& ps, const ConePoint& p0, double delta, double dt, RngStream& y_noise,
                         RngStream& theta_noise) {
  require_model_case(ps);
  if (!(delta > 0.0) || delta > -ps.a() || delta > ps.b()) throw DomainError("cone exit: delta outside (0, min(-a, b)]");
  if (std::abs(p0.y()) >= delta) throw DomainError("cone exit: start must satisfy |y~| < delta");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double x_lo = ps.u_tilde(-delta);
  const double x_hi = ps.u_tilde(delta);
  const double sqrt_dt = std::sqrt(dt);

  ConeWalker w{ps, y_noise, theta_noise};
  w.start(p0);
  ConeExit out;
  if (p0.is_vertex()) ++out.vertex_visits;
  for (std::uint64_t k = 1; k <= kMaxSteps; ++k) {
    double xn = 0.0, dtheta = 0.0, rate = 0.0;
    const bool at_vertex = w.step(sqrt_dt, xn, dtheta, rate);
    if (at_vertex) {
      w.theta = kTwoPi * theta_noise.uniform();
      ++out.vertex_visits;
    }
    if (xn <= x_lo || xn >= x_hi) {
      const bool low = xn <= x_lo;
      const double f = ((low ? x_lo : x_hi) - w.x) / (xn - w.x);
      if (!at_vertex) w.theta += f * dtheta;
      out.time = (static_cast<double>(k - 1) + f) * dt;
      out.point = ConePoint(w.theta, low ? -delta : delta);
      return out;
    }
    if (!at_vertex) w.theta += dtheta;
    w.x = xn;
    w.y = ps.invert_u_tilde(xn);
  }
  throw RunawayError("no exit within the hard step cap");
}

}  // namespace vfric
