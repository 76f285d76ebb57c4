#include "vfric/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vfric/errors.hpp"

namespace vfric {

namespace {

// Acceptance threshold for the scaled residual of a discrete solve.
constexpr double kSolveRelativeResidual = 1e-9;

using boost::math::quadrature::gauss_kronrod;

void check_interval(const ScaleEvaluator& s, double q, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("interval must satisfy lo < hi");
  if (!s.profile().contains(lo) || !s.profile().contains(hi)) throw DomainError("interval outside [a-1, b+1]");
  if (q < lo || q > hi) throw DomainError("q outside [lo, hi]");
}

double scale_span(const ScaleEvaluator& s, double lo, double hi) {
  const double d = s.u(hi) - s.u(lo);
  if (!(d > 1e-14 * std::max(1.0, s.u_max() - s.u_min()))) {
    throw DegenerateIntervalError("u(hi) = u(lo): the interval lies inside a flat stretch of the scale");
  }
  return d;
}

// Adaptive G-K on [lo, hi], split where the profile may lose smoothness.
double integrate_split(const std::function<double(double)>& f, double lo, double hi, const FrictionProfile& p) {
  std::vector<double> pts{lo};
  for (double b : {p.flat_lo, 0.0, p.flat_hi}) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  pts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate([&f](double x) { return f(x); }, pts[i], pts[i + 1], 20, 1e-10,
                                                  &err);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Discrete generalized second-order problems.
//
// Nodes x_0 < ... < x_N (natural-scale coordinate), cells h_j = x_{j+1} - x_j,
// speed weights m_j = v(pos_{j+1/2}) - v(pos_{j-1/2}). At interior nodes
//   c_j m_j g_j - [(g_{j+1} - g_j)/h_j - (g_j - g_{j-1})/h_{j-1}] = rhs_j m_j,
// with Dirichlet values at both ends. The matrix is an M-matrix, so the
// discrete maximum principle holds.

struct Mesh {
  std::vector<double> x, pos, m;
  double h(std::size_t j) const { return x[j + 1] - x[j]; }
  std::size_t last() const { return x.size() - 1; }
};

struct Dirichlet {
  std::vector<double> c, rhs;
  double left = 0.0, right = 0.0;
};

struct Homogeneous {
  std::vector<double> left, right;  // vanish at the left / right end
  double wronskian = 0.0;
  double rel_spread = 0.0;
};

// Wronskian statistics use cells [first_cell, end_cell).
Homogeneous shoot(const Mesh& mesh, const std::vector<double>& c, std::size_t first_cell, std::size_t end_cell) {
  const std::size_t N = mesh.last();
  Homogeneous out;
  out.left.assign(N + 1, 0.0);
  out.right.assign(N + 1, 0.0);
  out.left[1] = mesh.h(0);
  double flux = 1.0;
  for (std::size_t j = 1; j < N; ++j) {
    flux += c[j] * mesh.m[j] * out.left[j];
    out.left[j + 1] = out.left[j] + mesh.h(j) * flux;
  }
  out.right[N - 1] = mesh.h(N - 1);
  flux = -1.0;
  for (std::size_t j = N - 1; j >= 1; --j) {
    flux -= c[j] * mesh.m[j] * out.right[j];
    out.right[j - 1] = out.right[j] - mesh.h(j - 1) * flux;
  }
  // Casoratian form of the Wronskian, constant along the grid.
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = first_cell; j < std::min(end_cell, N); ++j) {
    const double w = (out.left[j + 1] * out.right[j] - out.right[j + 1] * out.left[j]) / mesh.h(j);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    sum += w;
    ++count;
  }
  out.wronskian = sum / static_cast<double>(count);
  out.rel_spread = (hi - lo) / std::abs(out.wronskian);
  return out;
}

std::vector<double> green_solve(const Mesh& mesh, const Dirichlet& prob, const Homogeneous& hs) {
  const std::size_t N = mesh.last();
  std::vector<double> g(N + 1, 0.0);
  std::vector<double> prefix(N + 1, 0.0), suffix(N + 1, 0.0);
  for (std::size_t k = 1; k < N; ++k) prefix[k] = prefix[k - 1] + hs.left[k] * prob.rhs[k] * mesh.m[k];
  for (std::size_t k = N - 1; k >= 1; --k) suffix[k] = suffix[k + 1] + hs.right[k] * prob.rhs[k] * mesh.m[k];
  for (std::size_t j = 1; j < N; ++j) {
    g[j] = (hs.right[j] * prefix[j] + hs.left[j] * suffix[j + 1]) / hs.wronskian;
  }
  // g = g~ + C xi_left + C' xi_right, fixing the end values.
  for (std::size_t j = 0; j <= N; ++j) {
    g[j] += prob.right * hs.left[j] / hs.left[N] + prob.left * hs.right[j] / hs.right[0];
  }
  g[0] = prob.left;
  g[N] = prob.right;
  return g;
}

std::vector<double> thomas_solve(const Mesh& mesh, const Dirichlet& prob) {
  const std::size_t N = mesh.last();
  std::vector<double> g(N + 1, 0.0);
  g[0] = prob.left;
  g[N] = prob.right;
  if (N < 2) return g;
  const std::size_t n = N - 1;
  std::vector<double> sub(n), diag(n), sup(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + 1;
    const double a = 1.0 / mesh.h(j - 1);
    const double b = 1.0 / mesh.h(j);
    sub[i] = -a;
    sup[i] = -b;
    diag[i] = prob.c[j] * mesh.m[j] + a + b;
    rhs[i] = prob.rhs[j] * mesh.m[j];
  }
  rhs[0] += prob.left / mesh.h(0);
  rhs[n - 1] += prob.right / mesh.h(N - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  g[n] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) g[i + 1] = (rhs[i] - sup[i] * g[i + 2]) / diag[i];
  return g;
}

struct Residual {
  double absolute = 0.0;
  double relative = 0.0;  // componentwise backward error |r| / (|A| |g| + |rhs|)
};

Residual residual_of(const Mesh& mesh, const Dirichlet& prob, const std::vector<double>& g) {
  Residual out;
  for (std::size_t j = 1; j < mesh.last(); ++j) {
    const double flux_r = (g[j + 1] - g[j]) / mesh.h(j);
    const double flux_l = (g[j] - g[j - 1]) / mesh.h(j - 1);
    const double r = prob.c[j] * g[j] - (flux_r - flux_l) / mesh.m[j] - prob.rhs[j];
    const double size = std::abs(prob.c[j] * g[j]) +
                        (std::abs(g[j + 1]) / mesh.h(j) + std::abs(g[j]) * (1.0 / mesh.h(j) + 1.0 / mesh.h(j - 1)) +
                         std::abs(g[j - 1]) / mesh.h(j - 1)) /
                            mesh.m[j] +
                        std::abs(prob.rhs[j]);
    out.absolute = std::max(out.absolute, std::abs(r));
    if (size > 0.0) out.relative = std::max(out.relative, std::abs(r) / size);
  }
  return out;
}

// Uniform x-grid on [x_lo, x_hi] with x_mid as a node; node counts split in
// proportion to the lengths. pos_of inverts the scale, speed evaluates v.
Mesh build_mesh(double x_lo, double x_mid, double x_hi, std::size_t cells,
                const std::function<double(double)>& pos_of, const std::function<double(double)>& speed) {
  if (cells < 4) cells = 4;
  const double span = x_hi - x_lo;
  std::size_t n_left = 0;
  if (x_mid > x_lo) {
    n_left = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cells * (x_mid - x_lo) / span)), 2,
                                     cells - 2);
  }
  if (x_mid >= x_hi) n_left = cells;
  Mesh mesh;
  mesh.x.reserve(cells + 1);
  for (std::size_t j = 0; j <= n_left; ++j) {
    mesh.x.push_back(j == n_left ? x_mid : x_lo + (x_mid - x_lo) * static_cast<double>(j) / static_cast<double>(n_left));
  }
  const std::size_t n_right = cells - n_left;
  for (std::size_t j = 1; j <= n_right; ++j) {
    mesh.x.push_back(j == n_right ? x_hi
                                  : x_mid + (x_hi - x_mid) * static_cast<double>(j) / static_cast<double>(n_right));
  }
  const std::size_t N = mesh.last();
  mesh.pos.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) mesh.pos[j] = pos_of(mesh.x[j]);
  std::vector<double> v_half(N);
  for (std::size_t j = 0; j < N; ++j) v_half[j] = speed(pos_of(0.5 * (mesh.x[j] + mesh.x[j + 1])));
  mesh.m.assign(N + 1, 0.0);
  for (std::size_t j = 1; j < N; ++j) mesh.m[j] = v_half[j] - v_half[j - 1];
  return mesh;
}

Mesh sub_mesh(const Mesh& mesh, std::size_t from, std::size_t to) {
  Mesh out;
  out.x.assign(mesh.x.begin() + static_cast<std::ptrdiff_t>(from), mesh.x.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  out.pos.assign(mesh.pos.begin() + static_cast<std::ptrdiff_t>(from),
                 mesh.pos.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  out.m.assign(mesh.m.begin() + static_cast<std::ptrdiff_t>(from), mesh.m.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  out.m.front() = 0.0;
  out.m.back() = 0.0;
  return out;
}

}  // namespace

double exit_probability(const ScaleEvaluator& s, double q, double lo, double hi) {
  check_interval(s, q, lo, hi);
  const double d = scale_span(s, lo, hi);
  return std::clamp((s.u(q) - s.u(lo)) / d, 0.0, 1.0);
}

double green_kernel(const ScaleEvaluator& s, double q, double r, double lo, double hi) {
  check_interval(s, q, lo, hi);
  if (r < lo || r > hi) throw DomainError("r outside [lo, hi]");
  const double d = scale_span(s, lo, hi);
  const double a = std::min(q, r);
  const double b = std::max(q, r);
  return (s.u(a) - s.u(lo)) * (s.u(hi) - s.u(b)) / d;
}

double expected_additive_functional(const ScaleEvaluator& s, double q, double lo, double hi,
                                    const std::function<double(double)>& f) {
  check_interval(s, q, lo, hi);
  const double d = scale_span(s, lo, hi);
  if (q == lo || q == hi) return 0.0;
  const double u_lo = s.u(lo);
  const double u_hi = s.u(hi);
  const double u_q = s.u(q);
  const auto& p = s.profile();
  const double below = integrate_split([&](double r) { return (s.u(r) - u_lo) * f(r) * s.v_prime(r); }, lo, q, p);
  const double above = integrate_split([&](double r) { return (u_hi - s.u(r)) * f(r) * s.v_prime(r); }, q, hi, p);
  return ((u_hi - u_q) * below + (u_q - u_lo) * above) / d;
}

double expected_exit_time(const ScaleEvaluator& s, double q, double lo, double hi) {
  return expected_additive_functional(s, q, lo, hi, [](double) { return 1.0; });
}

BVPSolution solve_laplace_bvp(const ScaleEvaluator& s, double lam, double q, double lo, double hi,
                              std::size_t cells) {
  check_interval(s, q, lo, hi);
  if (!(lam > 0.0)) throw DomainError("laplace: lambda must be positive");
  scale_span(s, lo, hi);
  const double x_lo = s.u(lo), x_hi = s.u(hi), x_q = s.u(q);
  const Mesh mesh = build_mesh(
      x_lo, x_q, x_hi, cells, [&](double x) { return s.invert_u_on(std::clamp(x, x_lo, x_hi), lo, hi); },
      [&](double qq) { return s.v(qq); });
  Dirichlet prob;
  prob.c.assign(mesh.x.size(), lam);
  prob.rhs.assign(mesh.x.size(), 0.0);
  prob.left = prob.right = 1.0;
  BVPSolution sol;
  sol.values = thomas_solve(mesh, prob);
  const Residual res = residual_of(mesh, prob, sol.values);
  sol.residual_norm = res.absolute;
  sol.relative_residual = res.relative;
  sol.grid = mesh.pos;
  sol.x = mesh.x;
  return sol;
}

double laplace_exit_time(const ScaleEvaluator& s, double lam, double q, double lo, double hi,
                         const LaplaceOptions& options) {
  check_interval(s, q, lo, hi);
  if (q == lo || q == hi) return 1.0;
  auto value_at_q = [&](std::size_t cells) {
    const BVPSolution sol = solve_laplace_bvp(s, lam, q, lo, hi, cells);
    // The strong-form residual of a double-precision solution grows like 1/h^2 from
    // rounding alone, so the solve is judged by the scaled residual.
    if (sol.relative_residual > kSolveRelativeResidual) {
      throw AccuracyError("laplace BVP solve is inaccurate (scaled residual too large)");
    }
    const auto it = std::find(sol.grid.begin(), sol.grid.end(), q);
    const auto j = it != sol.grid.end() ? static_cast<std::size_t>(it - sol.grid.begin())
                                        : static_cast<std::size_t>(std::lower_bound(sol.x.begin(), sol.x.end(), s.u(q)) -
                                                                   sol.x.begin());
    return sol.values[std::min(j, sol.values.size() - 1)];
  };
  std::size_t cells = options.cells;
  double coarse = value_at_q(cells);
  while (2 * cells <= options.max_cells) {
    cells *= 2;
    const double fine = value_at_q(cells);
    if (std::abs(fine - coarse) <= options.tolerance) return fine;
    coarse = fine;
  }
  std::ostringstream os;
  os << "laplace BVP not converged at " << cells << " cells; raise max_cells";
  throw AccuracyError(os.str());
}

BVPSolution resolvent_mode_solve(const ProjectedScale& ps, int n, double lam, const std::function<double(double)>& G,
                                 std::size_t cells, ResolventMethod method) {
  if (!(lam > 0.0)) throw DomainError("resolvent: lambda must be positive");
  if (n != 0 && std::abs(G(0.0)) > 1e-12) {
    throw InconsistentDataError("resolvent: a mode n != 0 needs G(0) = 0");
  }
  const double x_lo = ps.u_tilde_min();
  const double x_hi = ps.u_tilde_max();
  Mesh mesh = build_mesh(
      x_lo, 0.0, x_hi, cells, [&](double x) { return ps.invert_u_tilde(std::clamp(x, x_lo, x_hi)); },
      [&](double y) { return ps.v_tilde(y); });
  const std::size_t N = mesh.last();
  const std::size_t zero =
      static_cast<std::size_t>(std::find(mesh.x.begin(), mesh.x.end(), 0.0) - mesh.x.begin());

  Dirichlet prob;
  prob.c.resize(N + 1);
  prob.rhs.resize(N + 1);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t j = 0; j <= N; ++j) {
    const double lt = ps.lambda_tilde(mesh.pos[j]);
    prob.c[j] = (n == 0 || j == zero) ? lam : lam + n2 / (lt * lt);
    prob.rhs[j] = G(mesh.pos[j]);
  }
  prob.left = prob.rhs[0] / lam;
  prob.right = prob.rhs[N] / lam;

  BVPSolution sol;
  sol.grid = mesh.pos;
  sol.x = mesh.x;
  sol.values.assign(N + 1, 0.0);

  auto solve_piece = [&](const Mesh& piece, const Dirichlet& pp, std::size_t first_cell, std::size_t end_cell,
                         bool keep_xi) {
    if (method == ResolventMethod::direct) return thomas_solve(piece, pp);
    const Homogeneous hs = shoot(piece, pp.c, first_cell, end_cell);
    sol.wronskian_rel_spread = std::max(sol.wronskian_rel_spread, hs.rel_spread);
    if (keep_xi) {
      sol.xi1 = hs.left;
      sol.xi2 = hs.right;
      sol.wronskian = hs.wronskian;
    }
    return green_solve(piece, pp, hs);
  };

  Residual residual;
  if (n == 0) {
    const auto g = solve_piece(mesh, prob, 0, N, true);
    sol.values = g;
    residual = residual_of(mesh, prob, g);
  } else {
    // The halves decouple through g(0) = 0. On each half the solution that
    // grows away from 0 is xi_1; the other one blows up at 0 and is used only
    // from the first node off 0 on.
    for (int side = 0; side < 2; ++side) {
      const std::size_t from = side == 0 ? 0 : zero;
      const std::size_t to = side == 0 ? zero : N;
      const Mesh piece = sub_mesh(mesh, from, to);
      Dirichlet pp;
      pp.c.assign(prob.c.begin() + static_cast<std::ptrdiff_t>(from), prob.c.begin() + static_cast<std::ptrdiff_t>(to) + 1);
      pp.rhs.assign(prob.rhs.begin() + static_cast<std::ptrdiff_t>(from),
                    prob.rhs.begin() + static_cast<std::ptrdiff_t>(to) + 1);
      pp.left = side == 0 ? prob.left : 0.0;
      pp.right = side == 0 ? 0.0 : prob.right;
      const std::size_t cells_here = piece.last();
      auto g = side == 0 ? solve_piece(piece, pp, 0, cells_here - 1, false)
                         : solve_piece(piece, pp, 1, cells_here, true);
      std::copy(g.begin(), g.end(), sol.values.begin() + static_cast<std::ptrdiff_t>(from));
      const Residual r = residual_of(piece, pp, g);
      residual.absolute = std::max(residual.absolute, r.absolute);
      residual.relative = std::max(residual.relative, r.relative);
    }
  }
  sol.residual_norm = residual.absolute;
  sol.relative_residual = residual.relative;
  return sol;
}

MixingBounds mixing_bounds(const ProjectedScale& ps, double eps, double delta, double delta_prime, double delta2,
                           int M, const RhoConstants& k) {
  if (!(eps >= 0.0)) throw DomainError("mixing_bounds: eps must be nonnegative");
  if (!(delta_prime > 0.0 && delta_prime < delta)) throw DomainError("mixing_bounds: need 0 < delta' < delta");
  if (!(delta2 > 0.0)) throw DomainError("mixing_bounds: delta'' must be positive");
  if (M < 1) throw DomainError("mixing_bounds: M must be at least 1");
  const double up = ps.u_tilde(delta);
  const double down = -ps.u_tilde(-delta);
  const double up_p = ps.u_tilde(delta_prime);
  const double down_p = -ps.u_tilde(-delta_prime);

  MixingBounds b;
  b.alpha_ratio = std::max((up_p + eps * delta_prime) / (up + eps * delta),
                           (down_p + eps * delta_prime) / (down + eps * delta));
  b.beta_ratio = std::max(eps * delta2 / (up + eps * (delta + delta2)), eps * delta2 / (down + eps * (delta + delta2)));
  const double p_beta = 1.0 - b.beta_ratio;
  const double p_count = std::pow(p_beta, M - 1);
  b.p_alpha = std::clamp(1.0 - b.alpha_ratio, 0.0, 1.0);
  b.p_beta = std::clamp(p_beta, 0.0, 1.0);
  b.p_count = std::clamp(p_count, 0.0, 1.0);
  b.omega = std::max(0.0, 2.0 * ((1.0 - p_count) + 2.0 * b.alpha_ratio));
  b.delta_u = up + down;
  b.rho_clock = k.C1 * std::exp(-k.A * std::pow(delta2, 5) * k.kappa * M);
  b.rho_exit = (up_p - ps.u_tilde(0.0) + k.C2 * eps) / b.delta_u;
  b.rho = std::max(0.0, b.rho_clock + 2.0 * b.omega + b.rho_exit);
  return b;
}

namespace {

void fill_schedule(const ProjectedScale& ps, Schedule& s) {
  s.delta_prime = s.delta * s.delta;
  const double up = ps.u_tilde(s.delta);
  const double down = -ps.u_tilde(-s.delta);
  s.delta_u = up + down;
  const double log_inv_eps = std::log(1.0 / s.eps);
  const double log_term = std::log(1.0 / (s.delta_u * s.delta_u));
  s.delta2 = log_term > 0.0 ? std::pow(log_term / (s.delta_u * log_inv_eps), 0.2) : NAN;
  s.clock_lhs = std::pow(s.delta2, 5) * s.M;
  s.clock_rhs = log_term;
  s.mixing_lhs = s.M * s.eps * s.delta2 / std::min(up, down);
  s.mixing_rhs = s.delta_u * s.delta_u;
}

bool admissible(const Schedule& s) {
  return std::isfinite(s.delta2) && s.clock_lhs >= s.clock_rhs && s.mixing_lhs <= s.mixing_rhs;
}

}  // namespace

Schedule schedule(const ProjectedScale& ps, double eps, const ScheduleOptions& options) {
  if (!(eps > 0.0) || !(eps < std::exp(-1.0))) {
    throw ScheduleError("schedule: eps must lie in (0, 1/e) so that ln ln (1/eps) > 0");
  }
  Schedule s;
  s.eps = eps;
  s.M = std::max(1, static_cast<int>(std::lround(std::log(1.0 / eps))));
  s.default_delta = 1.0 / std::log(std::log(1.0 / eps));
  const double delta_cap = std::min(-ps.a(), ps.b());
  s.delta = s.default_delta;
  if (s.delta < delta_cap) fill_schedule(ps, s);
  while (s.delta < delta_cap && !admissible(s) && options.ladder_search && options.ladder_growth > 1.0) {
    s.delta *= options.ladder_growth;
    ++s.ladder_steps;
    if (s.delta < delta_cap) fill_schedule(ps, s);
  }
  if (s.delta >= delta_cap || !admissible(s)) {
    std::ostringstream os;
    os << "schedule constraints fail at eps=" << eps << " (delta=" << s.delta << "): clock " << s.clock_lhs
       << " >= " << s.clock_rhs << ", mixing " << s.mixing_lhs << " <= " << s.mixing_rhs;
    throw ScheduleError(os.str());
  }
  return s;
}

}  // namespace vfric
