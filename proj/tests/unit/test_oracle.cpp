#include <doctest.h>

#include <cmath>
#include <vector>

#include "vfric/errors.hpp"
#include "vfric/friction.hpp"
#include "vfric/oracle.hpp"
#include "vfric/scale.hpp"

using namespace vfric;

namespace {

double u_quad(double q, double eps) {
  const double e = std::max(std::abs(q) - 1.0, 0.0);
  return std::copysign(e * e * e / 3.0, q) + eps * q;
}

// With zero drift and v = 2u the process is a Brownian motion in x = u(q),
// so exit functionals have Brownian closed forms in that coordinate.
double bm_exit_time(double x, double l, double h) { return (x - l) * (h - x); }

double bm_laplace(double x, double l, double h, double lam) {
  const double k = std::sqrt(2.0 * lam);
  return std::cosh(k * (x - 0.5 * (l + h))) / std::cosh(k * 0.5 * (h - l));
}

}  // namespace

TEST_CASE("exit probability") {
  const ScaleEvaluator s(quadratic_profile(), 0.1);
  CHECK(exit_probability(s, 0.5, -3.0, 3.0) == doctest::Approx(0.508427).epsilon(1e-6));
  CHECK(exit_probability(s, -3.0, -3.0, 3.0) == 0.0);
  CHECK(exit_probability(s, 3.0, -3.0, 3.0) == 1.0);
  for (double q : {-2.5, -1.2, 0.0, 0.3, 1.7}) {
    const double expected = (u_quad(q, 0.1) - u_quad(-3.0, 0.1)) / (u_quad(3.0, 0.1) - u_quad(-3.0, 0.1));
    CHECK(exit_probability(s, q, -3.0, 3.0) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK_THROWS_AS(exit_probability(s, 3.1, -3.0, 3.0), DomainError);
  CHECK_THROWS_AS(exit_probability(s, 0.0, 1.0, -1.0), DomainError);
  const ScaleEvaluator s0(quadratic_profile(), 0.0);
  CHECK_THROWS_AS(exit_probability(s0, 0.0, -0.5, 0.5), DegenerateIntervalError);
}

TEST_CASE("expected exit time") {
  const double eps = 0.1;
  const ScaleEvaluator s(quadratic_profile(), eps);
  CHECK(expected_exit_time(s, 0.0, -1.0, 1.0) == doctest::Approx(eps * eps).epsilon(1e-8));
  for (double q : {-1.2, 0.0, 0.5, 1.9}) {
    const double x = u_quad(q, eps);
    const double expected = bm_exit_time(x, u_quad(-1.5, eps), u_quad(2.0, eps));
    CHECK(expected_exit_time(s, q, -1.5, 2.0) == doctest::Approx(expected).epsilon(1e-7));
  }
  CHECK(expected_exit_time(s, -1.5, -1.5, 2.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("exit time is bounded by the total speed mass") {
  const ScaleEvaluator s(quartic_profile(), 0.05);
  const double bound = (s.u(2.5) - s.u(-2.5)) * (s.v(2.5) - s.v(-2.5)) / 4.0;
  for (double q : {-2.0, 0.0, 0.7, 2.2}) {
    const double e = expected_exit_time(s, q, -2.5, 2.5);
    CHECK(e >= 0.0);
    CHECK(e <= bound);
  }
}

TEST_CASE("Green kernel") {
  const ScaleEvaluator s(asymmetric_profile(), 0.1);
  for (double q : {-2.0, -0.3, 0.4, 1.8})
    for (double r : {-2.4, -1.0, 0.0, 2.1}) {
      CHECK(green_kernel(s, q, r, -2.5, 2.5) == doctest::Approx(green_kernel(s, r, q, -2.5, 2.5)).epsilon(1e-14));
      CHECK(green_kernel(s, q, r, -2.5, 2.5) >= 0.0);
    }
  CHECK(green_kernel(s, 0.0, -2.5, -2.5, 2.5) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(green_kernel(s, 0.0, 2.6, -2.5, 2.5), DomainError);
}

TEST_CASE("additive functional with f = 1 is the exit time") {
  const ScaleEvaluator s(asymmetric_profile(), 0.1);
  CHECK(expected_additive_functional(s, 0.3, -2.0, 2.5, [](double) { return 1.0; }) ==
        doctest::Approx(expected_exit_time(s, 0.3, -2.0, 2.5)).epsilon(1e-8));
}

TEST_CASE("Laplace transform of the exit time") {
  const double eps = 0.1;
  const ScaleEvaluator s(quadratic_profile(), eps);
  CHECK(laplace_exit_time(s, 1.0, 0.0, -1.0, 1.0) ==
        doctest::Approx(1.0 / std::cosh(eps * std::sqrt(2.0))).epsilon(1e-6));
  const double l = u_quad(-1.5, eps), h = u_quad(2.0, eps);
  double previous = 1.0;
  for (double lam : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double m = laplace_exit_time(s, lam, 0.5, -1.5, 2.0);
    CHECK(m == doctest::Approx(bm_laplace(u_quad(0.5, eps), l, h, lam)).epsilon(1e-6));
    CHECK(m < previous);  // decreasing in lambda
    previous = m;
  }
  CHECK(laplace_exit_time(s, 1.0, 2.0, -1.5, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(laplace_exit_time(s, 0.0, 0.5, -1.5, 2.0), DomainError);
  CHECK_THROWS_AS(laplace_exit_time(s, 1.0, 0.5, -1.5, 2.0, {64, 1e-14, 128}), AccuracyError);
}

TEST_CASE("Laplace BVP diagnostics") {
  const ScaleEvaluator s(quadratic_profile(), 0.1);
  const auto sol = solve_laplace_bvp(s, 1.0, 0.5, -1.5, 2.0, 1024);
  CHECK(sol.grid.size() == sol.values.size());
  CHECK(sol.x.size() == sol.values.size());
  CHECK(sol.values.front() == 1.0);
  CHECK(sol.values.back() == 1.0);
  CHECK(sol.relative_residual < 1e-12);
  for (std::size_t i = 1; i < sol.x.size(); ++i) CHECK(sol.x[i] > sol.x[i - 1]);
}

TEST_CASE("resolvent modes") {
  const ProjectedScale ps(quadratic_profile());
  SUBCASE("constant data, mode 0") {
    for (auto method : {ResolventMethod::green, ResolventMethod::direct}) {
      const auto sol = resolvent_mode_solve(ps, 0, 2.0, [](double) { return 1.0; }, 1024, method);
      for (double g : sol.values) CHECK(g == doctest::Approx(0.5).epsilon(1e-10));
    }
  }
  SUBCASE("zero data gives zero") {
    for (int n : {0, 1, 3}) {
      const auto sol = resolvent_mode_solve(ps, n, 1.0, [](double) { return 0.0; }, 512);
      for (double g : sol.values) CHECK(g == 0.0);
    }
  }
  SUBCASE("green and direct agree") {
    auto G = [](double y) { return std::sin(2.0 * y) + 0.5 * y; };
    for (int n : {0, 1, 4}) {
      const auto a = resolvent_mode_solve(ps, n, 0.7, G, 2048, ResolventMethod::green);
      const auto b = resolvent_mode_solve(ps, n, 0.7, G, 2048, ResolventMethod::direct);
      REQUIRE(a.values.size() == b.values.size());
      for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-8).scale(1.0));
      CHECK(a.wronskian_rel_spread < 1e-6);
      CHECK(a.values.front() == doctest::Approx(G(-2.0) / 0.7));
      CHECK(a.values.back() == doctest::Approx(G(2.0) / 0.7));
    }
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(resolvent_mode_solve(ps, 1, 1.0, [](double) { return 1.0; }), InconsistentDataError);
    CHECK_THROWS_AS(resolvent_mode_solve(ps, 0, 0.0, [](double) { return 1.0; }), DomainError);
  }
}

TEST_CASE("mixing bounds") {
  const ProjectedScale ps(quadratic_profile());
  SUBCASE("closed form for the quadratic profile") {
    const double eps = 0.01, d = 0.5, dp = 0.25, d2 = 0.3;
    const int M = 4;
    const auto b = mixing_bounds(ps, eps, d, dp, d2, M);
    const double up = d * d * d / 3.0, upp = dp * dp * dp / 3.0;
    const double ra = (upp + eps * dp) / (up + eps * d);
    const double rb = eps * d2 / (up + eps * (d + d2));
    CHECK(b.p_alpha == doctest::Approx(1.0 - ra).epsilon(1e-10));
    CHECK(b.p_beta == doctest::Approx(1.0 - rb).epsilon(1e-10));
    CHECK(b.p_count == doctest::Approx(std::pow(1.0 - rb, M - 1)).epsilon(1e-10));
    CHECK(b.omega == doctest::Approx(2.0 * ((1.0 - std::pow(1.0 - rb, M - 1)) + 2.0 * ra)).epsilon(1e-10));
    CHECK(b.delta_u == doctest::Approx(2.0 * up).epsilon(1e-10));
  }
  SUBCASE("vanishing eps") {
    const auto b = mixing_bounds(ps, 0.0, 0.5, 0.05, 0.3, 5);
    CHECK(b.p_beta == 1.0);
    CHECK(b.p_count == 1.0);
    CHECK(b.omega == doctest::Approx(0.004).epsilon(1e-9));
  }
  CHECK_THROWS_AS(mixing_bounds(ps, 0.01, 0.5, 0.6, 0.3, 5), DomainError);
  CHECK_THROWS_AS(mixing_bounds(ps, 0.01, 0.5, 0.25, 0.3, 0), DomainError);
}

TEST_CASE("schedule") {
  const ProjectedScale ps(quadratic_profile());
  const auto s = schedule(ps, 0.01);
  CHECK(s.M == 5);
  CHECK(s.delta == doctest::Approx(0.9214).epsilon(1e-3));
  CHECK(s.delta_prime == doctest::Approx(s.delta * s.delta));
  CHECK(s.delta2 == doctest::Approx(0.8848).epsilon(1e-3));
  CHECK(s.ladder_steps == 7);
  CHECK(s.clock_lhs >= s.clock_rhs);
  CHECK(s.mixing_lhs <= s.mixing_rhs);

  const auto tiny = schedule(ps, 1e-6);
  CHECK(tiny.M == 14);
  CHECK(tiny.default_delta == doctest::Approx(1.0 / std::log(std::log(1e6))));

  CHECK_THROWS_AS(schedule(ps, 1.0), ScheduleError);
  CHECK_THROWS_AS(schedule(ps, 0.5), ScheduleError);
  CHECK_THROWS_AS(schedule(ps, 0.01, {false, 1.05}), ScheduleError);
}
