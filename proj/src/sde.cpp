#include "vfric/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vfric/errors.hpp"
#include "vfric/glue.hpp"

namespace vfric {

const char* to_string(Scheme s) { return s == Scheme::euler ? "euler" : "natural_scale"; }

const char* to_string(Level l) {
  switch (l) {
    case Level::lower:
      return "lower";
    case Level::upper:
      return "upper";
    default:
      return "none";
  }
}

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::euler;
  if (name == "natural_scale" || name == "natural") return Scheme::natural_scale;
  throw ConfigError("unknown scheme '" + name + "' (expected euler or natural_scale)");
}

RegularizedModel::RegularizedModel(FrictionProfile profile, double eps) : eps_(eps) {
  if (!(eps > 0.0)) throw DomainError("RegularizedModel: eps must be positive");
  scale_ = std::make_shared<const ScaleEvaluator>(std::move(profile), eps);
  if (!this->profile().has_drift()) {
    flat_x_lo_ = eps * this->profile().flat_lo;
    flat_x_hi_ = eps * this->profile().flat_hi;
  }
}

double RegularizedModel::x_of_q(double q) const { return scale_->u(q); }

double RegularizedModel::q_of_x(double x) const {
  // With b = 0 the scale is exactly eps*q on the flat stretch.
  if (!profile().has_drift() && x >= flat_x_lo_ && x <= flat_x_hi_) return x / eps_;
  return scale_->invert_u(x);
}

double RegularizedModel::clock_rate(double q) const {
  const double s = profile().lambda(q) + eps_;
  return 1.0 / (s * s);
}

namespace {

// Moves a path in the scheme's working coordinate: x = u^eps(q) for the
// natural scale, q itself for Euler. Both maps are increasing, so levels
// can be compared in either coordinate.
class Walker {
 public:
  Walker(const RegularizedModel& m, Scheme scheme) : m_(m), scheme_(scheme) {
    if (scheme == Scheme::natural_scale && m.profile().has_drift()) {
      throw UnsupportedSchemeError("natural_scale requires zero drift b");
    }
    dom_lo_ = coord(m.profile().lower());
    dom_hi_ = coord(m.profile().upper());
  }

  double coord(double q) const { return scheme_ == Scheme::natural_scale ? m_.x_of_q(q) : q; }
  double q_of(double c) const { return scheme_ == Scheme::natural_scale ? m_.q_of_x(c) : c; }

  double step(double c, double h, double sqrt_h, double z) const {
    if (scheme_ == Scheme::natural_scale) return c + sqrt_h * z;
    const auto& p = m_.profile();
    const double s = p.lambda(c) + m_.eps();
    const double noise = 1.0 / s;
    double drift = -0.5 * p.lambda_prime(c) * noise * noise * noise;
    if (p.drift) drift += (*p.drift)(c)*noise;
    return c + drift * h + noise * sqrt_h * z;
  }

  double dom_lo() const { return dom_lo_; }
  double dom_hi() const { return dom_hi_; }

 private:
  const RegularizedModel& m_;
  Scheme scheme_;
  double dom_lo_ = 0.0;
  double dom_hi_ = 0.0;
};

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
}

void check_start(const FrictionProfile& p, double q0) {
  if (!p.contains(q0)) throw DomainError("start point outside [a-1, b+1]");
}

void check_levels(const FrictionProfile& p, double q0, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("exit levels must satisfy lo < hi");
  if (!p.contains(lo) || !p.contains(hi)) throw DomainError("exit levels outside [a-1, b+1]");
  if (!(lo < q0 && q0 < hi)) throw DomainError("start point must lie strictly between the exit levels");
}

// Fraction of the step [c, cn] at which the level is reached.
double crossing_fraction(double c, double cn, double level) {
  const double d = cn - c;
  if (d == 0.0) return 1.0;
  return std::clamp((level - c) / d, 0.0, 1.0);
}

std::size_t step_count(double T, double dt) {
  if (!(T >= 0.0)) throw DomainError("horizon T must be nonnegative");
  const double n = std::ceil(T / dt - 1e-9);
  if (n > static_cast<double>(kMaxSteps)) throw RunawayError("path needs more than the hard step cap");
  return static_cast<std::size_t>(std::max(0.0, n));
}

PathRecord simulate_path(const RegularizedModel& m, double theta0, double q0, double T, double dt, Scheme scheme,
                         RngStream& y_noise, RngStream* theta_noise, std::size_t record_every) {
  check_dt(dt);
  check_start(m.profile(), q0);
  if (record_every == 0) record_every = 1;
  const bool two_d = theta_noise != nullptr;
  const Walker w(m, scheme);
  const std::size_t n = step_count(T, dt);

  PathRecord rec;
  double c = w.coord(q0);
  double q = q0;
  double theta = theta0;
  double clock = 0.0;
  auto record = [&](double t, double qq) {
    rec.times.push_back(t);
    rec.q.push_back(qq);
    if (two_d) {
      rec.theta.push_back(normalize_angle(theta));
      rec.clock.push_back(clock);
    }
  };
  record(0.0, q0);

  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t k = 1; k <= n; ++k) {
    const double h = (k == n) ? T - static_cast<double>(n - 1) * dt : dt;
    const double sqrt_h = (k == n) ? std::sqrt(h) : sqrt_dt;
    const double cn = w.step(c, h, sqrt_h, y_noise.normal());
    double rate = 0.0;
    double dtheta = 0.0;
    if (two_d) {
      rate = m.clock_rate(q);
      dtheta = std::sqrt(rate) * sqrt_h * theta_noise->normal();
    }
    const double t_prev = static_cast<double>(k - 1) * dt;
    if (cn <= w.dom_lo() || cn >= w.dom_hi()) {
      const bool low = cn <= w.dom_lo();
      const double f = crossing_fraction(c, cn, low ? w.dom_lo() : w.dom_hi());
      theta += f * dtheta;
      clock += f * rate * h;
      rec.stopped = true;
      rec.boundary = low ? Level::lower : Level::upper;
      record(t_prev + f * h, low ? m.profile().lower() : m.profile().upper());
      return rec;
    }
    c = cn;
    theta += dtheta;
    clock += rate * h;
    const bool keep = (k % record_every == 0) || k == n;
    if (two_d || keep) q = w.q_of(c);
    if (keep) record(k == n ? T : static_cast<double>(k) * dt, q);
  }
  return rec;
}

ExitRecord exit_run(const RegularizedModel& m, double theta0, double q0, double lo, double hi, double dt,
                    Scheme scheme, RngStream& y_noise, RngStream* theta_noise) {
  check_dt(dt);
  check_levels(m.profile(), q0, lo, hi);
  const bool two_d = theta_noise != nullptr;
  const Walker w(m, scheme);
  const double lo_c = w.coord(lo);
  const double hi_c = w.coord(hi);
  const double sqrt_dt = std::sqrt(dt);

  double c = w.coord(q0);
  double q = q0;
  double theta = theta0;
  double clock = 0.0;
  for (std::uint64_t k = 1; k <= kMaxSteps; ++k) {
    const double cn = w.step(c, dt, sqrt_dt, y_noise.normal());
    double rate = 0.0;
    double dtheta = 0.0;
    if (two_d) {
      rate = m.clock_rate(q);
      dtheta = std::sqrt(rate) * sqrt_dt * theta_noise->normal();
    }
    if (cn <= lo_c || cn >= hi_c) {
      const bool low = cn <= lo_c;
      const double f = crossing_fraction(c, cn, low ? lo_c : hi_c);
      ExitRecord r;
      r.time = (static_cast<double>(k - 1) + f) * dt;
      r.q = low ? lo : hi;
      r.which = low ? Level::lower : Level::upper;
      r.steps = k;
      if (two_d) {
        r.theta = normalize_angle(theta + f * dtheta);
        r.clock = clock + f * rate * dt;
      }
      return r;
    }
    c = cn;
    if (two_d) {
      q = w.q_of(c);
      theta += dtheta;
      clock += rate * dt;
    }
  }
  throw RunawayError("no exit within the hard step cap; dt is too small for this eps");
}

}  // namespace

PathRecord simulate_path_1d(const RegularizedModel& m, double q0, double T, double dt, Scheme scheme,
                            RngStream& y_noise, std::size_t record_every) {
  return simulate_path(m, 0.0, q0, T, dt, scheme, y_noise, nullptr, record_every);
}

PathRecord simulate_path_2d(const RegularizedModel& m, double theta0, double y0, double T, double dt,
                            Scheme scheme, RngStream& y_noise, RngStream& theta_noise,
                            std::size_t record_every) {
  if (m.profile().has_drift()) throw UnsupportedSchemeError("the cylinder model requires zero drift b");
  return simulate_path(m, theta0, y0, T, dt, scheme, y_noise, &theta_noise, record_every);
}

ExitRecord first_exit(const RegularizedModel& m, double q0, double lo, double hi, double dt, Scheme scheme,
                      RngStream& y_noise) {
  return exit_run(m, 0.0, q0, lo, hi, dt, scheme, y_noise, nullptr);
}

ExitRecord first_exit_2d(const RegularizedModel& m, double theta0, double y0, double lo, double hi, double dt,
                         Scheme scheme, RngStream& y_noise, RngStream& theta_noise) {
  if (m.profile().has_drift()) throw UnsupportedSchemeError("the cylinder model requires zero drift b");
  return exit_run(m, theta0, y0, lo, hi, dt, scheme, y_noise, &theta_noise);
}

std::vector<ExitRecord> first_exit_strided(const RegularizedModel& m, double q0, double lo, double hi,
                                           double dt, const std::vector<std::size_t>& strides,
                                           RngStream& y_noise) {
  check_dt(dt);
  check_levels(m.profile(), q0, lo, hi);
  if (strides.empty()) throw DomainError("first_exit_strided: no strides given");
  for (auto s : strides) {
    if (s == 0) throw DomainError("first_exit_strided: strides must be positive");
  }
  const Walker w(m, Scheme::natural_scale);
  const double lo_c = w.coord(lo);
  const double hi_c = w.coord(hi);
  const double sqrt_dt = std::sqrt(dt);

  const double x0 = w.coord(q0);
  std::vector<ExitRecord> out(strides.size());
  std::vector<double> last(strides.size(), x0);
  std::vector<bool> done(strides.size(), false);
  std::size_t remaining = strides.size();
  double x = x0;
  for (std::uint64_t k = 1; k <= kMaxSteps; ++k) {
    x += sqrt_dt * y_noise.normal();
    for (std::size_t i = 0; i < strides.size(); ++i) {
      if (done[i] || k % strides[i] != 0) continue;
      if (x <= lo_c || x >= hi_c) {
        const bool low = x <= lo_c;
        const double f = crossing_fraction(last[i], x, low ? lo_c : hi_c);
        const auto s = static_cast<double>(strides[i]);
        out[i].time = (static_cast<double>(k) - s + f * s) * dt;
        out[i].q = low ? lo : hi;
        out[i].which = low ? Level::lower : Level::upper;
        out[i].steps = k / strides[i];
        done[i] = true;
        if (--remaining == 0) return out;
      } else {
        last[i] = x;
      }
    }
  }
  throw RunawayError("no exit within the hard step cap; dt is too small for this eps");
}

CrossingCounters crossing_sequence(const RegularizedModel& m, double q0, double delta, double delta_prime,
                                   double T_max, double dt, Scheme scheme, RngStream& y_noise) {
  check_dt(dt);
  const auto& p = m.profile();
  check_start(p, q0);
  if (!(delta_prime > 0.0 && delta_prime < delta)) throw DomainError("crossing_sequence: need 0 < delta' < delta");
  if (p.flat_hi + delta >= p.upper() || p.flat_lo - delta <= p.lower()) {
    throw DomainError("crossing_sequence: G(delta) levels must lie inside the domain");
  }
  const Walker w(m, scheme);
  const double g_lo = w.coord(p.flat_lo - delta);
  const double g_hi = w.coord(p.flat_hi + delta);
  const double c_lo = w.coord(p.flat_lo - delta_prime);
  const double c_hi = w.coord(p.flat_hi + delta_prime);
  const double sqrt_dt = std::sqrt(dt);

  CrossingCounters out;
  out.taus.push_back(0.0);
  double c = w.coord(q0);
  bool seek_sigma = true;
  if (c <= g_lo || c >= g_hi) {
    out.sigmas.push_back(0.0);
    seek_sigma = false;
  }
  for (std::uint64_t k = 1; k <= kMaxSteps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double cn = w.step(c, dt, sqrt_dt, y_noise.normal());
    if (seek_sigma && (cn <= g_lo || cn >= g_hi)) {
      out.sigmas.push_back(t_prev + crossing_fraction(c, cn, cn <= g_lo ? g_lo : g_hi) * dt);
      seek_sigma = false;
    } else if (!seek_sigma && cn >= c_lo && cn <= c_hi) {
      out.taus.push_back(t_prev + crossing_fraction(c, cn, c < c_lo ? c_lo : c_hi) * dt);
      seek_sigma = true;
    } else if (!seek_sigma && ((c < c_lo && cn > c_hi) || (c > c_hi && cn < c_lo))) {
      // Jumped across the whole C(delta') band in one step.
      out.taus.push_back(t_prev + crossing_fraction(c, cn, c < c_lo ? c_lo : c_hi) * dt);
      out.sigmas.push_back(t_prev + crossing_fraction(c, cn, cn <= g_lo ? g_lo : g_hi) * dt);
    }
    if (cn <= w.dom_lo() || cn >= w.dom_hi()) {
      const double t = t_prev + crossing_fraction(c, cn, cn <= w.dom_lo() ? w.dom_lo() : w.dom_hi()) * dt;
      out.absorbed = true;
      out.absorption_time = t;
      out.taus.push_back(t);
      break;
    }
    c = cn;
    if (static_cast<double>(k) * dt >= T_max) {
      out.truncated = true;
      break;
    }
  }
  out.sigma0 = out.sigmas.empty() ? 0.0 : out.sigmas.front();
  return out;
}

CrossingCounters alpha_beta_count(const RegularizedModel& m, double y0, double delta, double delta2, double dt,
                                  Scheme scheme, RngStream& y_noise) {
  check_dt(dt);
  const auto& p = m.profile();
  if (!(delta > 0.0) || !(delta2 > 0.0)) throw DomainError("alpha_beta_count: delta and delta'' must be positive");
  if (delta2 >= p.flat_hi - p.flat_lo) throw DomainError("alpha_beta_count: delta'' exceeds the flat stretch");
  if (!(y0 > p.flat_lo - delta && y0 < p.flat_hi + delta)) {
    throw DomainError("alpha_beta_count: start must lie strictly inside (-1-delta, 1+delta)");
  }
  if (p.flat_hi + delta > p.upper() || p.flat_lo - delta < p.lower()) {
    throw DomainError("alpha_beta_count: exit levels must lie inside the domain");
  }
  const Walker w(m, scheme);
  const double s_lo = w.coord(p.flat_lo - delta);
  const double s_hi = w.coord(p.flat_hi + delta);
  const double a_lo = w.coord(p.flat_lo);
  const double a_hi = w.coord(p.flat_hi);
  // C(-delta'') = {flat_lo + delta'', flat_hi - delta''}; when delta'' passes
  // the midpoint the two levels swap order, and the band between them is
  // what a path coming from C(0) must reach.
  double b_lo = w.coord(p.flat_lo + delta2);
  double b_hi = w.coord(p.flat_hi - delta2);
  if (b_lo > b_hi) std::swap(b_lo, b_hi);
  const double sqrt_dt = std::sqrt(dt);

  CrossingCounters out;
  double c = w.coord(y0);
  bool seek_alpha = true;
  if (c == a_lo || c == a_hi) {
    out.alphas.push_back(0.0);
    seek_alpha = false;
  }
  for (std::uint64_t k = 1; k <= kMaxSteps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double cn = w.step(c, dt, sqrt_dt, y_noise.normal());
    if (seek_alpha) {
      // C(0) is hit when the step touches or straddles either level.
      const bool hit_lo = (c - a_lo) * (cn - a_lo) <= 0.0;
      const bool hit_hi = (c - a_hi) * (cn - a_hi) <= 0.0;
      if (hit_lo || hit_hi) {
        double f = 1.0;
        if (hit_lo) f = std::min(f, crossing_fraction(c, cn, a_lo));
        if (hit_hi) f = std::min(f, crossing_fraction(c, cn, a_hi));
        out.alphas.push_back(t_prev + f * dt);
        seek_alpha = false;
      }
    } else {
      const bool inside = cn >= b_lo && cn <= b_hi;
      const bool across = (c < b_lo && cn > b_hi) || (c > b_hi && cn < b_lo);
      if (inside || across) {
        out.betas.push_back(t_prev + crossing_fraction(c, cn, c < b_lo ? b_lo : b_hi) * dt);
        seek_alpha = true;
      }
    }
    if (cn <= s_lo || cn >= s_hi) {
      const bool low = cn <= s_lo;
      out.sigma0 = t_prev + crossing_fraction(c, cn, low ? s_lo : s_hi) * dt;
      out.exit_side = low ? Level::lower : Level::upper;
      out.sigmas.push_back(out.sigma0);
      // A beta recorded on the exit step cannot precede sigma_0's level.
      if (!out.betas.empty() && out.betas.back() > out.sigma0) out.betas.pop_back();
      out.n_eps = out.alphas.size();
      return out;
    }
    c = cn;
  }
  throw RunawayError("no exit within the hard step cap; dt is too small for this eps");
}

}  // namespace vfric
