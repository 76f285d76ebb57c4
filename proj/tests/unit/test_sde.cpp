#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vfric/errors.hpp"
#include "vfric/friction.hpp"
#include "vfric/oracle.hpp"
#include "vfric/rng.hpp"
#include "vfric/sde.hpp"
#include "vfric/stats.hpp"

using namespace vfric;

TEST_CASE("scheme names") {
  CHECK(parse_scheme("euler") == Scheme::euler);
  CHECK(parse_scheme("natural_scale") == Scheme::natural_scale);
  CHECK(std::string(to_string(Scheme::natural_scale)) == "natural_scale");
  CHECK_THROWS(parse_scheme("milstein"));
}

TEST_CASE("natural-scale map is exact on the flat stretch") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  CHECK(m.x_of_q(0.5) == doctest::Approx(0.05));
  CHECK(m.q_of_x(0.05) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.q_of_x(m.x_of_q(2.2)) == doctest::Approx(2.2).epsilon(1e-10));
  CHECK(m.clock_rate(0.0) == doctest::Approx(100.0));
}

TEST_CASE("path length and end time") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  for (auto scheme : {Scheme::euler, Scheme::natural_scale}) {
    RngStream r(1, 0, Component::y_noise);
    const auto p = simulate_path_1d(m, 0.0, 0.0105, 1e-4, scheme, r);
    CHECK(p.times.size() == 106);  // ceil(T/dt) + 1
    CHECK(p.q.size() == p.times.size());
    CHECK(p.times.front() == 0.0);
    CHECK(p.times.back() == doctest::Approx(0.0105));
    CHECK_FALSE(p.stopped);
    CHECK(p.theta.empty());
  }
  RngStream r(1, 0, Component::y_noise);
  const auto thin = simulate_path_1d(m, 0.0, 0.01, 1e-4, Scheme::natural_scale, r, 10);
  CHECK(thin.times.size() == 11);
}

TEST_CASE("variance on the flat stretch is T / eps^2") {
  const double eps = 0.1, T = 1e-4;
  const RegularizedModel m(quadratic_profile(), eps);
  for (auto scheme : {Scheme::euler, Scheme::natural_scale}) {
    std::vector<double> finals;
    for (std::uint64_t i = 0; i < 4000; ++i) {
      RngStream r(2, i, Component::y_noise);
      finals.push_back(simulate_path_1d(m, 0.0, T, 1e-5, scheme, r).q.back());
    }
    double ss = 0.0;
    for (double q : finals) ss += q * q;
    const double var = ss / static_cast<double>(finals.size());
    const double expected = T / (eps * eps);
    CHECK(std::abs(var - expected) < 4.0 * expected * std::sqrt(2.0 / 4000.0));
  }
}

TEST_CASE("cylinder clock on the flat stretch") {
  const double eps = 0.1;
  const RegularizedModel m(quadratic_profile(), eps);
  RngStream y(3, 0, Component::y_noise), th(3, 0, Component::theta_noise);
  const auto p = simulate_path_2d(m, 1.0, 0.0, 1e-4, 1e-6, Scheme::natural_scale, y, th);
  REQUIRE(p.clock.size() == p.times.size());
  CHECK(p.clock.back() == doctest::Approx(1e-4 / (eps * eps)).epsilon(1e-9));
  for (double t : p.theta) {
    CHECK(t >= 0.0);
    CHECK(t < 2.0 * M_PI);
  }
}

TEST_CASE("paths stop at the domain boundary") {
  const RegularizedModel m(quadratic_profile(), 0.5);
  RngStream r(4, 0, Component::y_noise);
  const auto p = simulate_path_1d(m, 2.9, 100.0, 1e-4, Scheme::natural_scale, r);
  CHECK(p.stopped);
  CHECK(p.boundary != Level::none);
  CHECK(std::abs(p.q.back()) == doctest::Approx(3.0));
}

TEST_CASE("exit records are snapped to the level") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  RngStream r(5, 0, Component::y_noise);
  const auto e = first_exit(m, 0.5, -1.5, 2.0, 1e-5, Scheme::natural_scale, r);
  CHECK((e.q == -1.5 || e.q == 2.0));
  CHECK(e.which == (e.q == 2.0 ? Level::upper : Level::lower));
  CHECK(e.time > 0.0);
  CHECK(e.time <= static_cast<double>(e.steps) * 1e-5);
}

TEST_CASE("the finest stride reproduces first_exit") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  for (std::uint64_t i = 0; i < 20; ++i) {
    RngStream a(6, i, Component::y_noise), b(6, i, Component::y_noise);
    const auto single = first_exit(m, 0.0, -1.5, 1.5, 1e-5, Scheme::natural_scale, a);
    const auto strided = first_exit_strided(m, 0.0, -1.5, 1.5, 1e-5, {1, 4, 16}, b);
    REQUIRE(strided.size() == 3);
    CHECK(strided[0].time == single.time);
    CHECK(strided[0].which == single.which);
    // Coarser monitors never see the exit earlier than the step they land on.
    CHECK(strided[1].steps * 4 >= strided[0].steps);
    CHECK(strided[2].steps * 16 >= strided[1].steps * 4);
  }
}

TEST_CASE("exit frequency agrees with the scale function") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  std::size_t upper = 0;
  const std::size_t n = 4000;
  for (std::uint64_t i = 0; i < n; ++i) {
    RngStream r(7, i, Component::y_noise);
    if (first_exit(m, 0.5, -1.5, 2.0, 1e-5, Scheme::natural_scale, r).which == Level::upper) ++upper;
  }
  const double p = exit_probability(m.scale(), 0.5, -1.5, 2.0);
  const auto ci = binomial_ci_z(upper, n, 4.0);
  CHECK(ci.lo <= p);
  CHECK(p <= ci.hi);
}

TEST_CASE("argument checks") {
  const RegularizedModel m(quadratic_profile(), 0.1);
  RngStream r(8, 0, Component::y_noise);
  CHECK_THROWS_AS(first_exit(m, 0.5, -1.5, 2.0, 0.0, Scheme::euler, r), DomainError);
  CHECK_THROWS_AS(first_exit(m, 2.5, -1.5, 2.0, 1e-4, Scheme::euler, r), DomainError);
  CHECK_THROWS_AS(first_exit(m, 0.5, 2.0, -1.5, 1e-4, Scheme::euler, r), DomainError);
  CHECK_THROWS_AS(simulate_path_1d(m, 3.5, 1.0, 1e-4, Scheme::euler, r), DomainError);
  const RegularizedModel drifted(with_constant_drift(quadratic_profile(), 1.0), 0.1);
  CHECK_THROWS_AS(first_exit(drifted, 0.5, -1.5, 2.0, 1e-4, Scheme::natural_scale, r), UnsupportedSchemeError);
  RngStream th(8, 0, Component::theta_noise);
  CHECK_THROWS_AS(simulate_path_2d(drifted, 0.0, 0.0, 1.0, 1e-4, Scheme::euler, r, th), UnsupportedSchemeError);
  CHECK_THROWS_AS(RegularizedModel(quadratic_profile(), 0.0), DomainError);
}

TEST_CASE("crossing sequence alternates sigma and tau") {
  const RegularizedModel m(quadratic_profile(), 0.05);
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream r(9, i, Component::y_noise);
    const auto c = crossing_sequence(m, 0.0, 0.5, 0.25, 5.0, 1e-5, Scheme::natural_scale, r);
    REQUIRE_FALSE(c.taus.empty());
    CHECK(c.taus.front() == 0.0);
    CHECK((c.taus.size() == c.sigmas.size() || c.taus.size() == c.sigmas.size() + 1));
    for (std::size_t k = 0; k < c.sigmas.size(); ++k) {
      CHECK(c.taus[k] <= c.sigmas[k]);
      if (k + 1 < c.taus.size()) CHECK(c.sigmas[k] <= c.taus[k + 1]);
    }
    CHECK((c.absorbed || c.truncated));
    if (!c.sigmas.empty()) CHECK(c.sigma0 == c.sigmas.front());
  }
  RngStream r(9, 0, Component::y_noise);
  CHECK_THROWS_AS(crossing_sequence(m, 0.0, 0.5, 0.6, 1.0, 1e-5, Scheme::natural_scale, r), DomainError);
}

TEST_CASE("alpha/beta conventions") {
  const RegularizedModel m(quadratic_profile(), 0.05);
  std::size_t with_alpha = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream r(10, i, Component::y_noise);
    const auto c = alpha_beta_count(m, 1.2, 0.5, 0.5, 1e-5, Scheme::natural_scale, r);
    CHECK(c.n_eps == c.alphas.size());
    // alpha_1 < beta_1 < alpha_2 < ... < sigma_0
    CHECK((c.betas.size() == c.alphas.size() || c.betas.size() + 1 == c.alphas.size()));
    for (std::size_t k = 0; k < c.betas.size(); ++k) {
      CHECK(c.alphas[k] <= c.betas[k]);
      if (k + 1 < c.alphas.size()) CHECK(c.betas[k] <= c.alphas[k + 1]);
    }
    for (double t : c.alphas) CHECK(t <= c.sigma0);
    for (double t : c.betas) CHECK(t <= c.sigma0);
    CHECK(c.exit_side != Level::none);
    if (!c.alphas.empty()) ++with_alpha;
  }
  CHECK(with_alpha > 0);

  // Starting on C(0) counts as alpha_1 = 0.
  RngStream r(10, 0, Component::y_noise);
  const auto on = alpha_beta_count(m, 1.0, 0.5, 0.5, 1e-5, Scheme::natural_scale, r);
  REQUIRE_FALSE(on.alphas.empty());
  CHECK(on.alphas.front() == 0.0);
  CHECK_THROWS_AS(alpha_beta_count(m, 1.6, 0.5, 0.5, 1e-5, Scheme::natural_scale, r), DomainError);
  CHECK_THROWS_AS(alpha_beta_count(m, 0.0, 0.5, 2.5, 1e-5, Scheme::natural_scale, r), DomainError);
}
