#pragma once

#include <cstddef>
#include <vector>

namespace vfric {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| with the
/// asymptotic Kolmogorov p-value (Stephens' small-sample adjustment of the
/// argument). Throws DomainError on an empty sample.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
  std::vector<std::size_t> counts;
};

/// Pearson goodness of fit of angles in [0, 2pi) against the uniform law on
/// `bins` equal arcs. Needs bins >= 2 and at least 10 samples per bin.
ChiSquareResult chi_square_uniform(const std::vector<double>& angles, std::size_t bins);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at confidence `level`.
Interval binomial_ci(std::size_t successes, std::size_t trials, double level);

/// Wilson interval with the half-width expressed as z standard errors.
Interval binomial_ci_z(std::size_t successes, std::size_t trials, double z);

/// Anderson-Darling A^2 against the fully specified N(mean, sd^2), with the
/// asymptotic p-value of Marsaglia & Marsaglia (2004).
TestResult anderson_darling_normal(std::vector<double> sample, double mean, double sd);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(const std::vector<double>& values);

/// Two-sided standard normal quantile for a confidence level, e.g. 0.95 -> 1.96.
double z_for_level(double level);

}  // namespace vfric
