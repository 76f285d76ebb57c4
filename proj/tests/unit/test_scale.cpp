#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "vfric/errors.hpp"
#include "vfric/friction.hpp"
#include "vfric/scale.hpp"

using namespace vfric;

namespace {

// u^eps for the quadratic profile: sign(q) ((|q|-1)_+)^3 / 3 + eps q.
double u_quad(double q, double eps) {
  const double e = std::max(std::abs(q) - 1.0, 0.0);
  return std::copysign(e * e * e / 3.0, q) + eps * q;
}

}  // namespace

TEST_CASE("limiting scale of the quadratic profile") {
  const ScaleEvaluator s(quadratic_profile(), 0.0);
  CHECK(s.u(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(s.u(-2.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(s.u(0.7) == 0.0);
  CHECK(s.v(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("regularized scale matches the closed form") {
  for (double eps : {0.2, 0.1, 0.01}) {
    const ScaleEvaluator s(quadratic_profile(), eps);
    for (int i = 0; i <= 120; ++i) {
      const double q = -3.0 + 6.0 * i / 120.0;
      CHECK(s.u(q) == doctest::Approx(u_quad(q, eps)).epsilon(1e-10).scale(1.0));
      CHECK(s.v(q) == doctest::Approx(2.0 * u_quad(q, eps)).epsilon(1e-10).scale(1.0));
      CHECK(s.u_prime(q) == doctest::Approx(quadratic_profile().lambda(q) + eps));
    }
  }
  CHECK(ScaleEvaluator(quadratic_profile(), 0.1).u(0.5) == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("inversion round trip") {
  for (const auto& p : {quadratic_profile(), quartic_profile(), asymmetric_profile()}) {
    const ScaleEvaluator s(p, 0.05);
    for (int i = 0; i <= 300; ++i) {
      const double q = p.lower() + (p.upper() - p.lower()) * i / 300.0;
      CHECK(s.invert_u(s.u(q)) == doctest::Approx(q).epsilon(1e-9).scale(1.0));
    }
    CHECK_THROWS_AS(s.invert_u(s.u_max() + 1.0), RangeError);
    CHECK_THROWS_AS(s.invert_u(s.u_min() - 1.0), RangeError);
  }
}

TEST_CASE("domain errors") {
  const ScaleEvaluator s(quadratic_profile(), 0.1);
  CHECK_THROWS_AS(s.u(3.5), DomainError);
  CHECK_THROWS_AS(s.v(-3.5), DomainError);
  CHECK_THROWS_AS(ScaleEvaluator(quadratic_profile(), -0.1), DomainError);
  const ScaleEvaluator s0(quadratic_profile(), 0.0);
  CHECK_THROWS(s0.invert_u(0.0));
}

TEST_CASE("constant drift tilts the scale") {
  // b = c: B(x) = c int_0^x (lambda+eps); on the flat stretch u' = eps exp(-2 c eps x).
  const double eps = 0.1, c = 1.0;
  const ScaleEvaluator s(with_constant_drift(quadratic_profile(), c), eps);
  const double expected = (1.0 - std::exp(-2.0 * c * eps * 0.5)) / (2.0 * c);
  CHECK(s.u(0.5) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(s.u(-0.5) == doctest::Approx((1.0 - std::exp(2.0 * c * eps * 0.5)) / (2.0 * c)).epsilon(1e-10));
}

TEST_CASE("projected scale") {
  const ProjectedScale ps(quadratic_profile());
  CHECK(ps.u_tilde(0.0) == 0.0);
  CHECK(ps.u_tilde(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(ps.u_tilde(-1.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(ps.lambda_tilde(0.5) == doctest::Approx(0.25));
  CHECK(ps.invert_u_tilde(ps.u_tilde(0.8)) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(ps.invert_u_tilde(ps.u_tilde(-0.3)) == doctest::Approx(-0.3).epsilon(1e-9));

  const ProjectedScale asym(asymmetric_profile());
  for (double d : {0.1, 0.5, 1.0}) {
    CHECK(asym.u_tilde(-d) == doctest::Approx(-4.0 * d * d * d / 3.0).epsilon(1e-10));
    CHECK(asym.u_tilde(d) == doctest::Approx(d * d * d / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("scale table CSV") {
  const ScaleEvaluator s(quadratic_profile(), 0.1);
  std::ostringstream os;
  s.write_csv(os, 5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "q,u,v");
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ls(line);
    double q, u, v;
    char c1, c2;
    ls >> q >> c1 >> u >> c2 >> v;
    CHECK(u == doctest::Approx(u_quad(q, 0.1)).epsilon(1e-9).scale(1.0));
    CHECK(v == doctest::Approx(2.0 * u).epsilon(1e-9).scale(1.0));
  }
  CHECK(rows == 5);
}

TEST_CASE("cumulative table integrates and inverts") {
  const CumulativeTable t([](double x) { return std::exp(x); }, {-1.0, 0.0, 2.0}, {});
  CHECK(t.value(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(t.value(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  CHECK(t.invert(t.value(0.37), -1.0, 2.0, 1e-14) == doctest::Approx(0.37).epsilon(1e-11));
}
