#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vfric/friction.hpp"
#include "vfric/rng.hpp"
#include "vfric/scale.hpp"

namespace vfric {

/// euler: Euler-Maruyama on q with the regularized Ito coefficients.
/// natural_scale: X = u^eps(q) is simulated as a standard Brownian motion
/// and q is recovered by inverting u^eps. Only valid for zero drift b,
/// where Ito's formula makes u^eps(q_t) a martingale with unit quadratic
/// variation: d u^eps(q) = (lambda+eps) dq + (1/2) lambda' dq^2
///   = [-lambda'/(2 (lambda+eps)^2) + lambda'/(2 (lambda+eps)^2)] dt + dW.
enum class Scheme { euler, natural_scale };

enum class Level { none, lower, upper };

const char* to_string(Scheme s);
const char* to_string(Level l);
Scheme parse_scheme(const std::string& name);

/// Regularized model at fixed eps with its scale table. Construction builds
/// the table once; the object is immutable and shared by all paths.
class RegularizedModel {
 public:
  RegularizedModel(FrictionProfile profile, double eps);

  const FrictionProfile& profile() const { return scale_->profile(); }
  double eps() const { return eps_; }
  const ScaleEvaluator& scale() const { return *scale_; }

  /// u^eps(q)
  double x_of_q(double q) const;
  /// Inverse of u^eps; exact linear branch on the flat stretch when b = 0.
  double q_of_x(double x) const;
  /// Clock rate 1/(lambda(q)+eps)^2.
  double clock_rate(double q) const;

 private:
  double eps_;
  std::shared_ptr<const ScaleEvaluator> scale_;
  double flat_x_lo_ = 0.0;
  double flat_x_hi_ = 0.0;
};

/// Discretized trajectory. For the 1-d model theta and clock stay empty.
struct PathRecord {
  std::vector<double> times;
  std::vector<double> q;      // q (1-d) or y (2-d)
  std::vector<double> theta;  // [0, 2pi)
  std::vector<double> clock;  // int_0^t ds / (lambda(y_s)+eps)^2
  bool stopped = false;
  Level boundary = Level::none;  // lower = a-1, upper = b+1
};

struct ExitRecord {
  double time = 0.0;
  double q = 0.0;       // exit position, exactly on the crossed level
  double theta = 0.0;   // 2-d only
  double clock = 0.0;   // 2-d only
  Level which = Level::none;
  std::uint64_t steps = 0;
};

struct CrossingCounters {
  std::vector<double> taus;    // tau_0 = 0, tau_1, ...
  std::vector<double> sigmas;  // sigma_0, sigma_1, ...
  std::vector<double> alphas;
  std::vector<double> betas;
  std::size_t n_eps = 0;
  double sigma0 = 0.0;
  Level exit_side = Level::none;  // side of the first exit to G(delta) (alpha/beta runs)
  bool truncated = false;
  bool absorbed = false;
  double absorption_time = 0.0;
};

/// Hard cap on steps for any single run; exceeding it means dt is
/// mismatched with eps and raises RunawayError.
inline constexpr std::uint64_t kMaxSteps = 1'000'000'000ULL;

PathRecord simulate_path_1d(const RegularizedModel& m, double q0, double T, double dt, Scheme scheme,
                            RngStream& y_noise, std::size_t record_every = 1);

/// Cylinder model: y follows the 1-d dynamics (b = 0 is required), theta
/// gets increments noise(y_k) sqrt(dt) N(0,1) from an independent stream.
PathRecord simulate_path_2d(const RegularizedModel& m, double theta0, double y0, double T, double dt,
                            Scheme scheme, RngStream& y_noise, RngStream& theta_noise,
                            std::size_t record_every = 1);

/// First exit of q from (lo, hi). The crossing time is linearly
/// interpolated inside the crossing step and the state snapped to the level.
ExitRecord first_exit(const RegularizedModel& m, double q0, double lo, double hi, double dt, Scheme scheme,
                      RngStream& y_noise);

ExitRecord first_exit_2d(const RegularizedModel& m, double theta0, double y0, double lo, double hi, double dt,
                         Scheme scheme, RngStream& y_noise, RngStream& theta_noise);

/// One natural-scale Brownian path on the fine grid dt, monitored every
/// strides[i] steps; entry i is the exit record seen with step dt*strides[i].
/// Coarser monitors share the random numbers of the fine one, which makes
/// the differences between them a low-variance estimate of the dt bias.
std::vector<ExitRecord> first_exit_strided(const RegularizedModel& m, double q0, double lo, double hi,
                                           double dt, const std::vector<std::size_t>& strides,
                                           RngStream& y_noise);

/// Alternating visits to G(delta) = {|q| >= 1+delta} (sigma_n) and to
/// C(delta') = {|q| = 1+delta'} (tau_n) until absorption at a-1 or b+1 or
/// until T_max.
CrossingCounters crossing_sequence(const RegularizedModel& m, double q0, double delta, double delta_prime,
                                   double T_max, double dt, Scheme scheme, RngStream& y_noise);

/// alpha_k: hits of C(0) = {|y| = 1}; beta_k: hits of C(-delta2) =
/// {|y| = |1 - delta2|}; both before sigma_0, the exit to G(delta).
/// n_eps counts the alphas.
CrossingCounters alpha_beta_count(const RegularizedModel& m, double y0, double delta, double delta2, double dt,
                                  Scheme scheme, RngStream& y_noise);

}  // namespace vfric
