#include "vfric/friction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kFdStep = 1e-6;
constexpr double kFdTolerance = 1e-3;

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

std::string describe_point(const char* what, double q, double value) {
  std::ostringstream os;
  os << what << " at q=" << q << " (value " << value << ")";
  return os.str();
}

}  // namespace

bool FrictionProfile::contains(double q) const {
  return q >= lower() - kDomainSlack && q <= upper() + kDomainSlack;
}

Coefficients coefficients(const FrictionProfile& p, double eps, double q) {
  if (!(eps > 0.0)) throw DomainError("coefficients: eps must be positive");
  if (!p.contains(q)) throw DomainError("coefficients: q outside [a-1, b+1]");
  const double lam_eps = p.lambda(q) + eps;
  const double noise = 1.0 / lam_eps;
  double drift = -0.5 * p.lambda_prime(q) * noise * noise * noise;
  if (p.drift) drift += (*p.drift)(q) * noise;
  return {drift, noise};
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no validation check named " + name);
}

ValidationReport validate_profile(const FrictionProfile& p, std::size_t grid_n) {
  if (grid_n < 2) throw DomainError("validate_profile: grid_n must be at least 2");
  if (!p.lambda || !p.lambda_prime) throw InvalidProfileError("profile is missing lambda or lambda'");

  const double lo = p.lower();
  const double hi = p.upper();
  const double step = (hi - lo) / static_cast<double>(grid_n - 1);

  HypothesisCheck nonneg{"nonnegative", true, ""};
  HypothesisCheck flat_zero{"flat_region_zero", true, ""};
  HypothesisCheck positive{"positive_outside", true, ""};
  HypothesisCheck consistent{"derivative_consistent", true, ""};
  HypothesisCheck continuous{"derivative_continuous", true, ""};

  auto fail = [](HypothesisCheck& c, std::string detail) {
    if (c.passed) c.detail = std::move(detail);
    c.passed = false;
  };

  auto in_flat = [&](double q) { return q >= p.flat_lo && q <= p.flat_hi; };
  auto near_edge = [&](double q) {
    return std::abs(q - p.flat_lo) <= 2.0 * kFdStep || std::abs(q - p.flat_hi) <= 2.0 * kFdStep;
  };

  for (std::size_t i = 0; i < grid_n; ++i) {
    const double q = (i + 1 == grid_n) ? hi : lo + step * static_cast<double>(i);
    const double lam = p.lambda(q);
    const double dlam = p.lambda_prime(q);
    if (!std::isfinite(lam) || !std::isfinite(dlam)) {
      throw InvalidProfileError(describe_point("non-finite lambda", q, lam));
    }
    if (lam < 0.0) fail(nonneg, describe_point("negative lambda", q, lam));
    if (in_flat(q)) {
      if (lam != 0.0) fail(flat_zero, describe_point("nonzero lambda in flat stretch", q, lam));
    } else if (!(lam > 0.0)) {
      fail(positive, describe_point("lambda not positive outside flat stretch", q, lam));
    }

    // Central and one-sided differences need both neighbours inside the domain.
    if (q - kFdStep < lo || q + kFdStep > hi || near_edge(q)) continue;
    const double left = p.lambda(q - kFdStep);
    const double right = p.lambda(q + kFdStep);
    const double central = (right - left) / (2.0 * kFdStep);
    if (std::abs(central - dlam) > kFdTolerance * std::max(1.0, std::abs(dlam))) {
      fail(consistent, describe_point("lambda' disagrees with finite difference", q, dlam));
    }
    const double slope_left = (lam - left) / kFdStep;
    const double slope_right = (right - lam) / kFdStep;
    if (std::abs(slope_right - slope_left) > kFdTolerance * std::max(1.0, std::abs(dlam))) {
      fail(continuous, describe_point("lambda' jump", q, slope_right - slope_left));
    }
  }

  // The flat edges are where a kink would hide.
  for (double edge : {p.flat_lo, p.flat_hi}) {
    const double at = p.lambda(edge);
    const double slope_left = (at - p.lambda(edge - kFdStep)) / kFdStep;
    const double slope_right = (p.lambda(edge + kFdStep) - at) / kFdStep;
    if (std::abs(slope_right - slope_left) > kFdTolerance) {
      fail(continuous, describe_point("lambda' jump at flat edge", edge, slope_right - slope_left));
    }
    if (std::abs(p.lambda_prime(edge)) > kFdTolerance) {
      fail(continuous, describe_point("lambda' nonzero at flat edge", edge, p.lambda_prime(edge)));
    }
  }

  ValidationReport report;
  report.checks = {nonneg, flat_zero, positive, consistent, continuous};
  return report;
}

FrictionProfile quadratic_profile(double a, double b) {
  FrictionProfile p;
  p.name = "quadratic";
  p.lambda = [](double q) {
    const double d = positive_part(std::abs(q) - 1.0);
    return d * d;
  };
  p.lambda_prime = [](double q) {
    const double d = positive_part(std::abs(q) - 1.0);
    return q > 0.0 ? 2.0 * d : -2.0 * d;
  };
  p.a = a;
  p.b = b;
  p.divergent = true;
  return p;
}

FrictionProfile quartic_profile(double a, double b) {
  FrictionProfile p;
  p.name = "quartic";
  p.lambda = [](double q) {
    const double d = positive_part(std::abs(q) - 1.0);
    const double d2 = d * d;
    return d2 * d2;
  };
  p.lambda_prime = [](double q) {
    const double d = positive_part(std::abs(q) - 1.0);
    const double d3 = d * d * d;
    return q > 0.0 ? 4.0 * d3 : -4.0 * d3;
  };
  p.a = a;
  p.b = b;
  p.divergent = true;
  return p;
}

FrictionProfile asymmetric_profile(double a, double b, double bottom_scale) {
  FrictionProfile p;
  p.name = "asymmetric";
  p.lambda = [bottom_scale](double q) {
    if (q > 1.0) return (q - 1.0) * (q - 1.0);
    if (q < -1.0) return bottom_scale * (q + 1.0) * (q + 1.0);
    return 0.0;
  };
  p.lambda_prime = [bottom_scale](double q) {
    if (q > 1.0) return 2.0 * (q - 1.0);
    if (q < -1.0) return 2.0 * bottom_scale * (q + 1.0);
    return 0.0;
  };
  p.a = a;
  p.b = b;
  p.divergent = true;
  return p;
}

FrictionProfile make_profile(const std::string& name, double a, double b) {
  if (!(a < 0.0) || !(b > 0.0)) throw ConfigError("profile bounds must satisfy a < 0 < b");
  if (name == "quadratic") return quadratic_profile(a, b);
  if (name == "quartic") return quartic_profile(a, b);
  if (name == "asymmetric") return asymmetric_profile(a, b);
  throw ConfigError("unknown profile '" + name + "' (expected quadratic, quartic or asymmetric)");
}

FrictionProfile with_constant_drift(FrictionProfile p, double drift) {
  p.drift = [drift](double) { return drift; };
  return p;
}

double default_euler_dt(const FrictionProfile& p, double eps, std::size_t grid_n) {
  if (!(eps > 0.0)) throw DomainError("default_euler_dt: eps must be positive");
  if (grid_n < 2) grid_n = 2;
  const double lo = p.lower();
  const double step = (p.upper() - lo) / static_cast<double>(grid_n - 1);
  double min_quartic = std::pow(p.lambda(0.0) + eps, 4);
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double s = p.lambda(lo + step * static_cast<double>(i)) + eps;
    min_quartic = std::min(min_quartic, s * s * s * s);
  }
  return std::min(eps * eps, min_quartic) / 50.0;
}

}  // namespace vfric
