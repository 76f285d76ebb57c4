#include <doctest.h>

#include <cmath>

#include "vfric/errors.hpp"
#include "vfric/friction.hpp"

using namespace vfric;

TEST_CASE("coefficients in the flat stretch") {
  const auto p = quadratic_profile();
  const auto c = coefficients(p, 0.1, 0.0);
  CHECK(c.drift == 0.0);
  CHECK(c.noise == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("coefficients on the rising branch") {
  const auto c = coefficients(quadratic_profile(), 0.1, 1.5);
  // lambda = 0.25, lambda' = 1
  CHECK(c.drift == doctest::Approx(-1.0 / (2.0 * 0.35 * 0.35 * 0.35)).epsilon(1e-14));
  CHECK(c.drift == doctest::Approx(-11.6618).epsilon(1e-5));
  CHECK(c.noise == doctest::Approx(1.0 / 0.35).epsilon(1e-14));
}

TEST_CASE("constant drift shows up as b/(lambda+eps)") {
  const auto p = with_constant_drift(quadratic_profile(), 1.0);
  const auto c = coefficients(p, 0.1, 0.0);
  CHECK(c.drift == doctest::Approx(10.0));
  CHECK(c.noise == doctest::Approx(10.0));
}

TEST_CASE("coefficients reject bad eps and positions") {
  const auto p = quadratic_profile();
  CHECK_THROWS_AS(coefficients(p, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(coefficients(p, -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(coefficients(p, 0.1, 3.5), DomainError);
}

TEST_CASE("algebraic identities of the coefficients") {
  for (const auto& p : {quadratic_profile(), quartic_profile(), asymmetric_profile()}) {
    for (double eps : {0.2, 0.05, 0.001}) {
      for (int i = 0; i <= 600; ++i) {
        const double q = p.lower() + (p.upper() - p.lower()) * i / 600.0;
        const auto c = coefficients(p, eps, q);
        CHECK(c.noise * (p.lambda(q) + eps) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(c.drift == doctest::Approx(-0.5 * std::pow(c.noise, 3) * p.lambda_prime(q)).epsilon(1e-13));
        if (p.name != "asymmetric") {
          const auto m = coefficients(p, eps, -q);
          CHECK(m.drift == doctest::Approx(-c.drift).epsilon(1e-13));
          CHECK(m.noise == doctest::Approx(c.noise).epsilon(1e-15));
        }
      }
    }
  }
}

TEST_CASE("built-in profiles pass validation") {
  for (const auto& p : {quadratic_profile(), quartic_profile(), asymmetric_profile()}) {
    const auto r = validate_profile(p, 10000);
    INFO(p.name);
    CHECK(r.all_passed());
  }
}

TEST_CASE("zero friction fails positivity outside the flat stretch") {
  auto p = quadratic_profile();
  p.lambda = [](double) { return 0.0; };
  p.lambda_prime = [](double) { return 0.0; };
  const auto r = validate_profile(p, 1000);
  CHECK_FALSE(r.all_passed());
  CHECK_FALSE(r.check("positive_outside").passed);
  CHECK(r.check("nonnegative").passed);
}

TEST_CASE("a kink at the flat edges is detected") {
  auto p = quadratic_profile();
  p.lambda = [](double q) { return std::max(std::abs(q) - 1.0, 0.0); };
  p.lambda_prime = [](double q) { return std::abs(q) > 1.0 ? std::copysign(1.0, q) : 0.0; };
  const auto r = validate_profile(p, 1000);
  CHECK_FALSE(r.check("derivative_continuous").passed);
}

TEST_CASE("non-finite lambda raises") {
  auto p = quadratic_profile();
  p.lambda = [](double q) { return q > 2.0 ? NAN : 0.0; };
  CHECK_THROWS_AS(validate_profile(p, 100), InvalidProfileError);
}

TEST_CASE("profile lookup by name") {
  CHECK(make_profile("quartic").lambda(2.0) == doctest::Approx(1.0));
  CHECK(make_profile("asymmetric").lambda(-2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(make_profile("cubic"), ConfigError);
  CHECK_THROWS_AS(make_profile("quadratic", 1.0, 2.0), ConfigError);
}

TEST_CASE("default euler step follows the stiffness rule") {
  // min(eps^2, min (lambda+eps)^4) / 50; the minimum is at the flat stretch.
  CHECK(default_euler_dt(quadratic_profile(), 0.1) == doctest::Approx(std::pow(0.1, 4) / 50.0));
  CHECK_THROWS_AS(default_euler_dt(quadratic_profile(), 0.0), DomainError);
}
