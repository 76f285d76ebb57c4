#include "vfric/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

// Q_KS(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)
double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    if (term < 1e-300 || term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Asymptotic CDF of A^2 (Marsaglia & Marsaglia, J. Stat. Softw. 9(2), 2004).
double adinf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 + (.247105 - (.0649821 - (.0347962 - (.011672 - .00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
}

}  // namespace

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: both samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
  return r;
}

ChiSquareResult chi_square_uniform(const std::vector<double>& angles, std::size_t bins) {
  if (bins < 2) throw DomainError("chi_square_uniform: need at least 2 bins");
  if (angles.size() < 10 * bins) throw DomainError("chi_square_uniform: need at least 10 samples per bin");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ChiSquareResult r;
  r.counts.assign(bins, 0);
  for (double t : angles) {
    if (!(t >= 0.0 && t < two_pi)) throw DomainError("chi_square_uniform: angle outside [0, 2pi)");
    auto k = static_cast<std::size_t>(t / two_pi * static_cast<double>(bins));
    ++r.counts[std::min(k, bins - 1)];
  }
  const double expected = static_cast<double>(angles.size()) / static_cast<double>(bins);
  for (auto c : r.counts) {
    const double diff = static_cast<double>(c) - expected;
    r.statistic += diff * diff / expected;
  }
  r.dof = bins - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

Interval binomial_ci_z(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("binomial_ci: trials must be positive");
  if (successes > trials) throw DomainError("binomial_ci: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval r{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (successes == 0) r.lo = 0.0;
  if (successes == trials) r.hi = 1.0;
  return r;
}

Interval binomial_ci(std::size_t successes, std::size_t trials, double level) {
  return binomial_ci_z(successes, trials, z_for_level(level));
}

TestResult anderson_darling_normal(std::vector<double> sample, double mean, double sd) {
  if (sample.size() < 2) throw DomainError("anderson_darling_normal: need at least 2 observations");
  if (!(sd > 0.0)) throw DomainError("anderson_darling_normal: sd must be positive");
  std::sort(sample.begin(), sample.end());
  const boost::math::normal dist(mean, sd);
  const std::size_t n = sample.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = boost::math::cdf(dist, sample[i]);
    const double hi_tail = boost::math::cdf(boost::math::complement(dist, sample[n - 1 - i]));
    const double k = 2.0 * static_cast<double>(i) + 1.0;
    s += k * (std::log(std::max(lo, 1e-300)) + std::log(std::max(hi_tail, 1e-300)));
  }
  TestResult r;
  r.statistic = -static_cast<double>(n) - s / static_cast<double>(n);
  r.p_value = std::clamp(1.0 - adinf(r.statistic), 0.0, 1.0);
  return r;
}

MeanEstimate mean_estimate(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean_estimate: empty sample");
  MeanEstimate e;
  e.n = values.size();
  // Welford update for numerical stability.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  e.mean = mean;
  e.sd = e.n > 1 ? std::sqrt(m2 / static_cast<double>(e.n - 1)) : 0.0;
  e.std_error = e.sd / std::sqrt(static_cast<double>(e.n));
  return e;
}

}  // namespace vfric
