#include "vfric/scale.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

double gauss7(const std::function<double(double)>& f, double lo, double hi) {
  if (lo == hi) return 0.0;
  // Wrap by reference: the rule takes its functor by value.
  return gauss<double, 7>::integrate([&f](double x) { return f(x); }, lo, hi);
}

std::vector<double> physical_breakpoints(const FrictionProfile& p) {
  std::vector<double> pts{p.lower(), p.flat_lo, 0.0, p.flat_hi, p.upper()};
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

CumulativeTable::CumulativeTable(std::function<double(double)> integrand, std::vector<double> breakpoints,
                                 Options options)
    : integrand_(std::move(integrand)) {
  if (breakpoints.size() < 2) throw DomainError("CumulativeTable: need at least two breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      std::find(breakpoints.begin(), breakpoints.end(), 0.0) == breakpoints.end()) {
    throw DomainError("CumulativeTable: breakpoints must be increasing and contain 0");
  }

  const double span = breakpoints.back() - breakpoints.front();
  struct Cell {
    double lo, hi, integral;
  };
  std::vector<Cell> accepted;
  std::vector<std::pair<double, double>> pending;

  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double lo = breakpoints[k];
    const double hi = breakpoints[k + 1];
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(options.initial_cells * (hi - lo) / span)));
    for (std::size_t j = 0; j < n; ++j) {
      const double c0 = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
      const double c1 = (j + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(n);
      pending.emplace_back(c0, c1);
    }
  }

  while (!pending.empty()) {
    auto [lo, hi] = pending.back();
    pending.pop_back();
    double unused = 0.0;
    const double kronrod = gauss_kronrod<double, 15>::integrate([this](double x) { return integrand_(x); }, lo, hi, 0, 0.0, &unused);
    const double gauss_est = gauss7(integrand_, lo, hi);
    const double err = std::abs(kronrod - gauss_est);
    const bool ok = err <= options.rel_tol * std::abs(kronrod) + 1e-18 * (hi - lo);
    if (ok || accepted.size() + pending.size() >= options.max_cells || hi - lo < 1e-12) {
      accepted.push_back({lo, hi, kronrod});
    } else {
      const double mid = 0.5 * (lo + hi);
      pending.emplace_back(lo, mid);
      pending.emplace_back(mid, hi);
    }
  }

  std::sort(accepted.begin(), accepted.end(), [](const Cell& l, const Cell& r) { return l.lo < r.lo; });
  nodes_.reserve(accepted.size() + 1);
  for (const auto& c : accepted) nodes_.push_back(c.lo);
  nodes_.push_back(accepted.back().hi);

  values_.assign(nodes_.size(), 0.0);
  const auto origin = static_cast<std::size_t>(std::find(nodes_.begin(), nodes_.end(), 0.0) - nodes_.begin());
  for (std::size_t i = origin; i + 1 < nodes_.size(); ++i) values_[i + 1] = values_[i] + accepted[i].integral;
  for (std::size_t i = origin; i > 0; --i) values_[i - 1] = values_[i] - accepted[i - 1].integral;
}

std::size_t CumulativeTable::cell_of(double q) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), q);
  if (it == nodes_.begin()) return 0;
  const auto i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

double CumulativeTable::value(double q) const {
  const std::size_t i = cell_of(q);
  const double left = nodes_[i];
  const double right = nodes_[i + 1];
  if (q - left <= right - q) return values_[i] + gauss7(integrand_, left, q);
  return values_[i + 1] - gauss7(integrand_, q, right);
}

double CumulativeTable::invert(double x, double q_lo, double q_hi, double abs_tol) const {
  q_lo = std::max(q_lo, lower());
  q_hi = std::min(q_hi, upper());
  double lo = q_lo;
  double hi = q_hi;
  // Bracket ends are usually table nodes; read those from the table.
  auto value_at = [this](double q) {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), q);
    if (it != nodes_.end() && *it == q) return values_[static_cast<std::size_t>(it - nodes_.begin())];
    return value(q);
  };
  double f_lo = value_at(lo) - x;
  double f_hi = value_at(hi) - x;
  if (f_lo > abs_tol || f_hi < -abs_tol) throw RangeError("inverse requested outside the range of the map");
  if (std::abs(f_lo) <= abs_tol && std::abs(f_hi) > abs_tol) return lo;
  if (std::abs(f_hi) <= abs_tol && std::abs(f_lo) > abs_tol) return hi;

  // Tighten the bracket to one table cell.
  const auto first = std::upper_bound(nodes_.begin(), nodes_.end(), q_lo);
  const auto last = std::lower_bound(nodes_.begin(), nodes_.end(), q_hi);
  if (first < last) {
    const auto off0 = first - nodes_.begin();
    const auto off1 = last - nodes_.begin();
    const auto it = std::lower_bound(values_.begin() + off0, values_.begin() + off1, x);
    const auto j = static_cast<std::size_t>(it - values_.begin());
    if (j < static_cast<std::size_t>(off1)) {
      hi = nodes_[j];
      f_hi = values_[j] - x;
    }
    if (j > static_cast<std::size_t>(off0)) {
      lo = nodes_[j - 1];
      f_lo = values_[j - 1] - x;
    }
  }

  // Fast path: cubic Hermite guess for the inverse on the cell, polished by
  // safeguarded Newton steps.
  if (hi > lo) {
    const double d_lo = integrand_(lo);
    const double d_hi = integrand_(hi);
    const double span = f_hi - f_lo;
    double q = lo;
    if (span > 0.0) {
      const double s = -f_lo / span;
      q = lo + s * (hi - lo);
      if (d_lo > 0.0 && d_hi > 0.0) {
        // Hermite interpolation of q(x) with slopes 1/f at the cell ends.
        const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        const double guess = h00 * lo + h10 * span / d_lo + h01 * hi + h11 * span / d_hi;
        if (guess > lo && guess < hi) q = guess;
      }
    }
    for (int iter = 0; iter < 4; ++iter) {
      const double fq = value(q) - x;
      if (std::abs(fq) <= abs_tol) return q;
      if (fq > 0.0) {
        hi = q;
        f_hi = fq;
      } else {
        lo = q;
        f_lo = fq;
      }
      const double slope = integrand_(q);
      const double next = slope > 0.0 ? q - fq / slope : 0.5 * (lo + hi);
      q = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
  }

  // Illinois-modified regula falsi with bisection fallback.
  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(f_lo) <= abs_tol && f_lo >= -abs_tol && std::abs(f_hi) > abs_tol) return lo;
    if (std::abs(f_hi) <= abs_tol) return hi;
    double q = (f_hi != f_lo) ? hi - f_hi * (hi - lo) / (f_hi - f_lo) : 0.5 * (lo + hi);
    if (!(q > lo && q < hi) || iter % 8 == 7) q = 0.5 * (lo + hi);
    const double fq = value(q) - x;
    if (std::abs(fq) <= abs_tol) return q;
    if (fq > 0.0) {
      hi = q;
      f_hi = fq;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    } else {
      lo = q;
      f_lo = fq;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    }
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(q))) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

ScaleEvaluator::ScaleEvaluator(FrictionProfile profile, double eps, CumulativeTable::Options options)
    : profile_(std::move(profile)), eps_(eps) {
  if (!(eps >= 0.0)) throw DomainError("ScaleEvaluator: eps must be nonnegative");
  const auto breaks = physical_breakpoints(profile_);
  const auto lambda = profile_.lambda;
  const double e = eps_;

  if (profile_.drift) {
    const auto b = *profile_.drift;
    drift_integral_ = std::make_shared<const CumulativeTable>(
        [lambda, b, e](double x) { return b(x) * (lambda(x) + e); }, breaks, options);
    const auto B = drift_integral_;
    u_ = std::make_shared<const CumulativeTable>(
        [lambda, B, e](double x) { return (lambda(x) + e) * std::exp(-2.0 * B->value(x)); }, breaks, options);
    v_ = std::make_shared<const CumulativeTable>(
        [lambda, B, e](double x) { return 2.0 * (lambda(x) + e) * std::exp(2.0 * B->value(x)); }, breaks,
        options);
  } else {
    u_ = std::make_shared<const CumulativeTable>([lambda, e](double x) { return lambda(x) + e; }, breaks,
                                                 options);
    v_ = std::make_shared<const CumulativeTable>([lambda, e](double x) { return 2.0 * (lambda(x) + e); },
                                                 breaks, options);
  }
}

double ScaleEvaluator::check_domain(double q) const {
  if (!profile_.contains(q)) throw DomainError("scale: q outside [a-1, b+1]");
  return std::clamp(q, profile_.lower(), profile_.upper());
}

double ScaleEvaluator::u(double q) const { return u_->value(check_domain(q)); }
double ScaleEvaluator::v(double q) const { return v_->value(check_domain(q)); }
double ScaleEvaluator::u_prime(double q) const { return u_->derivative(check_domain(q)); }
double ScaleEvaluator::v_prime(double q) const { return v_->derivative(check_domain(q)); }

double ScaleEvaluator::invert_u(double x) const {
  if (!(eps_ > 0.0)) throw DomainError("invert_u: u is not strictly increasing for eps = 0");
  const double tol = inversion_tolerance();
  if (x < u_min() - tol || x > u_max() + tol) throw RangeError("invert_u: x outside [u(a-1), u(b+1)]");
  return u_->invert(x, profile_.lower(), profile_.upper(), tol);
}

double ScaleEvaluator::invert_u_on(double x, double q_lo, double q_hi) const {
  return u_->invert(x, q_lo, q_hi, inversion_tolerance());
}

void ScaleEvaluator::write_csv(std::ostream& out, std::size_t samples) const {
  if (samples < 2) samples = 2;
  out << "q,u,v\n";
  out.precision(17);
  const double lo = profile_.lower();
  const double hi = profile_.upper();
  for (std::size_t i = 0; i < samples; ++i) {
    const double q = (i + 1 == samples) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    out << q << ',' << u(q) << ',' << v(q) << '\n';
  }
}

ProjectedScale::ProjectedScale(FrictionProfile profile, CumulativeTable::Options options)
    : base_(std::move(profile), 0.0, options) {}

double ProjectedScale::physical(double y) const {
  if (y < a() - 1e-12 || y > b() + 1e-12) throw DomainError("projected scale: y outside [a, b]");
  if (y < 0.0) return std::max(y + profile().flat_lo, profile().lower());
  if (y > 0.0) return std::min(y + profile().flat_hi, profile().upper());
  return 0.0;
}

double ProjectedScale::u_tilde(double y) const { return y == 0.0 ? 0.0 : base_.u(physical(y)); }
double ProjectedScale::v_tilde(double y) const { return y == 0.0 ? 0.0 : base_.v(physical(y)); }
double ProjectedScale::lambda_tilde(double y) const {
  return y == 0.0 ? 0.0 : profile().lambda(physical(y));
}
double ProjectedScale::u_tilde_prime(double y) const { return y == 0.0 ? 0.0 : base_.u_prime(physical(y)); }

double ProjectedScale::invert_u_tilde(double x) const {
  const double tol = base_.inversion_tolerance();
  const double lo = u_tilde_min();
  const double hi = u_tilde_max();
  if (x < lo - tol || x > hi + tol) throw RangeError("invert_u_tilde: x outside [u~(a), u~(b)]");
  if (x > 0.0) {
    const double q = base_.invert_u_on(std::min(x, hi), profile().flat_hi, profile().upper());
    return std::clamp(q - profile().flat_hi, 0.0, b());
  }
  if (x < 0.0) {
    const double q = base_.invert_u_on(std::max(x, lo), profile().lower(), profile().flat_lo);
    return std::clamp(q - profile().flat_lo, a(), 0.0);
  }
  return 0.0;
}

}  // namespace vfric
