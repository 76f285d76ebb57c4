#include <doctest.h>

#include <cmath>
#include <vector>

#include "vfric/errors.hpp"
#include "vfric/rng.hpp"
#include "vfric/stats.hpp"

using namespace vfric;

TEST_CASE("Wilson interval") {
  const auto ci = binomial_ci(50, 100, 0.95);
  CHECK(ci.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(ci.hi == doctest::Approx(0.5962).epsilon(1e-3));
  const auto zero = binomial_ci(0, 100, 0.95);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  CHECK(zero.hi < 0.05);
  const auto all = binomial_ci(100, 100, 0.95);
  CHECK(all.hi == 1.0);
  CHECK(all.lo > 0.95);
  CHECK_THROWS(binomial_ci(0, 0, 0.95));
  CHECK_THROWS(binomial_ci(5, 4, 0.95));
  const auto z = binomial_ci_z(50, 100, 1.959963985);
  CHECK(z.lo == doctest::Approx(ci.lo).epsilon(1e-9));
}

TEST_CASE("normal quantile") {
  CHECK(z_for_level(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(z_for_level(0.9973002) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("KS statistic on a hand example") {
  const auto r = ks_two_sample({1.0, 2.0, 3.0}, {2.5, 3.5, 4.5});
  CHECK(r.statistic == doctest::Approx(2.0 / 3.0));
  CHECK(ks_two_sample({1.0, 2.0}, {1.0, 2.0}).statistic == 0.0);
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), DomainError);
}

TEST_CASE("KS p-values are roughly uniform under the null") {
  int rejections = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    RngStream r(123, static_cast<std::uint64_t>(t), Component::aux);
    std::vector<double> a(300), b(300);
    for (auto& x : a) x = r.normal();
    for (auto& x : b) x = r.normal();
    if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  // Binomial(400, 0.05): mean 20, sd ~4.4.
  CHECK(rejections >= 5);
  CHECK(rejections <= 36);
}

TEST_CASE("KS detects a shift") {
  RngStream r(7, 0, Component::aux);
  std::vector<double> a(2000), b(2000);
  for (auto& x : a) x = r.normal();
  for (auto& x : b) x = r.normal() + 0.3;
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("chi-square uniformity") {
  std::vector<double> even;
  for (int i = 0; i < 1600; ++i) even.push_back(2.0 * M_PI * (i + 0.5) / 1600.0);
  const auto r = chi_square_uniform(even, 16);
  CHECK(r.statistic == doctest::Approx(0.0));
  CHECK(r.dof == 15);
  CHECK(r.p_value == doctest::Approx(1.0));
  for (auto c : r.counts) CHECK(c == 100);

  std::vector<double> lumpy(1600, 0.1);
  CHECK(chi_square_uniform(lumpy, 16).p_value < 1e-12);
  CHECK_THROWS(chi_square_uniform(even, 1));
  CHECK_THROWS(chi_square_uniform(std::vector<double>(50, 1.0), 16));
}

TEST_CASE("Anderson-Darling rejects the wrong variance") {
  RngStream r(8, 0, Component::aux);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = 1.2 * r.normal();
  CHECK(anderson_darling_normal(xs, 0.0, 1.0).p_value < 1e-4);
  CHECK(anderson_darling_normal(xs, 0.0, 1.2).p_value > 0.001);
}

TEST_CASE("mean estimate") {
  const auto m = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(m.n == 4);
}
