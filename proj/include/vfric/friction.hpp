#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vfric {

using ScalarField = std::function<double(double)>;

/// Friction coefficient that vanishes on the flat stretch [flat_lo, flat_hi]
/// and is positive on the rest of the physical domain [a - 1, b + 1].
///
/// The projected (glued) domain is [a, b] with a < 0 < b; the physical
/// domain is obtained by re-inserting the unit-length flat stretches on
/// either side of the glued point.
struct FrictionProfile {
  std::string name;
  ScalarField lambda;
  ScalarField lambda_prime;
  std::optional<ScalarField> drift;  // b(q); only honoured by the 1-d model
  double flat_lo = -1.0;
  double flat_hi = 1.0;
  double a = -2.0;
  double b = 2.0;
  bool divergent = false;  // whether the integral of 1/lambda diverges at the flat edges

  double lower() const { return a - 1.0; }
  double upper() const { return b + 1.0; }
  bool contains(double q) const;
  bool has_drift() const { return drift.has_value(); }
};

struct Coefficients {
  double drift = 0.0;
  double noise = 0.0;
};

/// Ito coefficients of the regularized equation at q:
/// drift = b/(lambda+eps) - lambda'/(2 (lambda+eps)^3), noise = 1/(lambda+eps).
Coefficients coefficients(const FrictionProfile& p, double eps, double q);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;

  bool all_passed() const;
  const HypothesisCheck& check(const std::string& name) const;
};

/// Samples the profile on grid_n equally spaced points of the physical
/// domain and checks the friction hypotheses. Throws InvalidProfileError on
/// non-finite values.
ValidationReport validate_profile(const FrictionProfile& p, std::size_t grid_n);

// Built-in profiles. All vanish on [-1, 1] and have continuous lambda'.
FrictionProfile quadratic_profile(double a = -2.0, double b = 2.0);
FrictionProfile quartic_profile(double a = -2.0, double b = 2.0);
// ((q-1)_+)^2 above the flat stretch, bottom_scale * ((-q-1)_+)^2 below it.
FrictionProfile asymmetric_profile(double a = -2.0, double b = 2.0, double bottom_scale = 4.0);

/// Lookup by name: "quadratic", "quartic", "asymmetric".
FrictionProfile make_profile(const std::string& name, double a = -2.0, double b = 2.0);

FrictionProfile with_constant_drift(FrictionProfile p, double drift);

/// Euler step policy: min(eps^2, min over the grid of (lambda+eps)^4) / 50.
double default_euler_dt(const FrictionProfile& p, double eps, std::size_t grid_n = 2001);

}  // namespace vfric
