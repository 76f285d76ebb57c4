#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "vfric/rng.hpp"
#include "vfric/stats.hpp"

using namespace vfric;

TEST_CASE("streams are pure functions of their key") {
  RngStream a(42, 7, Component::y_noise), b(42, 7, Component::y_noise);
  for (int i = 0; i < 1000; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("keys differ across seed, path and component") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL})
    for (std::uint64_t path = 0; path < 100; ++path)
      for (auto c : {Component::y_noise, Component::theta_noise, Component::aux})
        keys.insert(stream_key(seed, path, c));
  CHECK(keys.size() == 900);
}

TEST_CASE("theta and y streams are uncorrelated") {
  RngStream y(3, 0, Component::y_noise), th(3, 0, Component::theta_noise);
  double sxy = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sxy += y.normal() * th.normal();
  CHECK(std::abs(sxy / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("normal draws pass Anderson-Darling") {
  RngStream r(99, 0, Component::aux);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = r.normal();
  CHECK(anderson_darling_normal(xs, 0.0, 1.0).p_value > 0.001);
}

TEST_CASE("uniform draws are in [0, 1) with the right mean") {
  RngStream r(5, 1, Component::aux);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}
