#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "vfric/friction.hpp"

namespace vfric {

/// Running integral F(q) = int_0^q f over a fixed interval, stored as a
/// node table refined until Gauss-Kronrod 7/15 agree on every cell.
/// Values between nodes are completed with a 7-point Gauss rule.
class CumulativeTable {
 public:
  struct Options {
    std::size_t initial_cells = 1024;
    double rel_tol = 1e-10;
    std::size_t max_cells = 1u << 20;
  };

  /// breakpoints must be increasing, contain 0, and span the interval; the
  /// integrand is assumed smooth between consecutive breakpoints.
  CumulativeTable(std::function<double(double)> integrand, std::vector<double> breakpoints,
                  Options options);

  double value(double q) const;
  double derivative(double q) const { return integrand_(q); }
  double lower() const { return nodes_.front(); }
  double upper() const { return nodes_.back(); }
  double min_value() const { return values_.front(); }
  double max_value() const { return values_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

  /// Solves value(q) = x for q in [q_lo, q_hi]. The table must be
  /// nondecreasing there and strictly increasing near the root.
  double invert(double x, double q_lo, double q_hi, double abs_tol) const;

 private:
  std::size_t cell_of(double q) const;

  std::function<double(double)> integrand_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Scale and speed functions of the regularized 1-d process,
///   u^eps(q) = int_0^q (lambda+eps) exp(-2 B(x)) dx,
///   v^eps(q) = 2 int_0^q (lambda+eps) exp(+2 B(x)) dx,
/// with B(x) = int_0^x b (lambda+eps). eps = 0 gives the limiting u, v,
/// which are constant on the flat stretch.
class ScaleEvaluator {
 public:
  ScaleEvaluator(FrictionProfile profile, double eps, CumulativeTable::Options options = {});

  const FrictionProfile& profile() const { return profile_; }
  double eps() const { return eps_; }

  double u(double q) const;
  double v(double q) const;
  double u_prime(double q) const;
  double v_prime(double q) const;

  double u_min() const { return u_->min_value(); }
  double u_max() const { return u_->max_value(); }
  /// Accuracy target for inversion: 1e-12 times the range of u^eps.
  double inversion_tolerance() const { return 1e-12 * (u_max() - u_min()); }

  /// q with u^eps(q) = x. Requires eps > 0; throws RangeError outside
  /// [u^eps(a-1), u^eps(b+1)].
  double invert_u(double x) const;

  /// Bracketed inverse on [q_lo, q_hi]; usable with eps = 0 when u is
  /// strictly increasing on the bracket.
  double invert_u_on(double x, double q_lo, double q_hi) const;

  const CumulativeTable& u_table() const { return *u_; }

  /// CSV dump with columns q,u,v sampled on `samples` equally spaced points.
  void write_csv(std::ostream& out, std::size_t samples) const;

 private:
  double check_domain(double q) const;

  FrictionProfile profile_;
  double eps_;
  std::shared_ptr<const CumulativeTable> drift_integral_;  // B(x); absent when b = 0
  std::shared_ptr<const CumulativeTable> u_;
  std::shared_ptr<const CumulativeTable> v_;
};

/// Scale functions carried to the glued domain [a, b]:
/// u~(y) = u(y-1) for y < 0, u(y+1) for y > 0, u~(0) = 0; likewise v~ and
/// lambda~. Built from the eps = 0 evaluator.
class ProjectedScale {
 public:
  explicit ProjectedScale(FrictionProfile profile, CumulativeTable::Options options = {});

  double a() const { return base_.profile().a; }
  double b() const { return base_.profile().b; }
  const ScaleEvaluator& underlying() const { return base_; }
  const FrictionProfile& profile() const { return base_.profile(); }

  double u_tilde(double y) const;
  double v_tilde(double y) const;
  double lambda_tilde(double y) const;
  double u_tilde_prime(double y) const;

  double u_tilde_min() const { return u_tilde(a()); }
  double u_tilde_max() const { return u_tilde(b()); }

  /// y in [a, b] with u~(y) = x.
  double invert_u_tilde(double x) const;

 private:
  double physical(double y) const;

  ScaleEvaluator base_;
};

}  // namespace vfric
