#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vfric/scale.hpp"

namespace vfric {

/// Probability that the eps-diffusion started at q leaves (lo, hi) through
/// hi: (u(q) - u(lo)) / (u(hi) - u(lo)). Throws DegenerateIntervalError
/// when u(hi) = u(lo), DomainError when q is outside [lo, hi].
double exit_probability(const ScaleEvaluator& s, double q, double lo, double hi);

/// G(q, r) = (u(min) - u(lo)) (u(hi) - u(max)) / (u(hi) - u(lo)).
double green_kernel(const ScaleEvaluator& s, double q, double r, double lo, double hi);

/// E_q of the exit time from (lo, hi): int G(q, r) dv(r), adaptive
/// Gauss-Kronrod with relative tolerance 1e-8 per piece.
double expected_exit_time(const ScaleEvaluator& s, double q, double lo, double hi);

/// E_q int_0^exit f(q_t) dt = int G(q, r) f(r) dv(r).
double expected_additive_functional(const ScaleEvaluator& s, double q, double lo, double hi,
                                    const std::function<double(double)>& f);

/// Solution of a discretized generalized two-point problem on nodes that
/// are uniform in the natural-scale coordinate x.
struct BVPSolution {
  std::vector<double> grid;    // positions (q or y) of the nodes
  std::vector<double> x;       // natural-scale coordinate of the nodes
  std::vector<double> values;
  double residual_norm = 0.0;      // max-norm residual of the discrete equation
  double relative_residual = 0.0;  // componentwise backward error of the discrete solve
  double error_estimate = 0.0; // grid-doubling estimate where computed
  // Homogeneous solutions used by the construction (right half for n != 0).
  std::vector<double> xi1, xi2;
  double wronskian = 0.0;
  double wronskian_rel_spread = 0.0;  // (max - min) / |mean| over the cells
};

struct LaplaceOptions {
  std::size_t cells = 4096;
  double tolerance = 1e-6;
  std::size_t max_cells = 1u << 18;
};

/// M(q) = E_q exp(-lam * exit time) from (lo, hi), from
/// D_v D_u M = lam M, M(lo) = M(hi) = 1, solved on an x = u grid that has q
/// as a node. The grid is doubled until two successive values agree within
/// options.tolerance; AccuracyError when max_cells is reached first.
double laplace_exit_time(const ScaleEvaluator& s, double lam, double q, double lo, double hi,
                         const LaplaceOptions& options = {});

/// The full discrete solution at a fixed resolution, q being a node.
BVPSolution solve_laplace_bvp(const ScaleEvaluator& s, double lam, double q, double lo, double hi,
                              std::size_t cells);

enum class ResolventMethod { green, direct };

/// Fourier mode n of the resolvent of the cone generator:
///   (lam + n^2 / lambda~^2) g - D_v~ D_u~ g = G on [a, b],
/// g(a) = G(a)/lam, g(b) = G(b)/lam; g(0) = 0 for n != 0 and a flux match
/// at 0 for n = 0. `green` assembles g = g~ + C xi_1 from the two
/// homogeneous solutions; `direct` is a plain tridiagonal solve of the same
/// discretization, kept as an independent cross-check.
BVPSolution resolvent_mode_solve(const ProjectedScale& ps, int n, double lam,
                                 const std::function<double(double)>& G, std::size_t cells = 4096,
                                 ResolventMethod method = ResolventMethod::green);

/// Constants of the mixing estimate that the analysis leaves unspecified.
struct RhoConstants {
  double C1 = 1.0;
  double A = 1.0;
  double kappa = 1.0;
  double C2 = 1.0;
};

struct MixingBounds {
  double p_alpha = 0.0;  // lower bound for P(alpha_1 < inf)
  double p_beta = 0.0;   // lower bound for P(beta_1 < inf | alpha_1 < inf)
  double p_count = 0.0;  // lower bound for P(n(eps) >= M | alpha_1 < inf)
  double omega = 0.0;
  double rho = 0.0;
  // Ingredients, kept for reports.
  double alpha_ratio = 0.0;
  double beta_ratio = 0.0;
  double delta_u = 0.0;       // u~(delta) - u~(-delta)
  double rho_clock = 0.0;     // C1 exp(-A delta''^5 kappa M)
  double rho_exit = 0.0;      // (u~(delta') - u~(0) + C2 eps) / delta_u
};

MixingBounds mixing_bounds(const ProjectedScale& ps, double eps, double delta, double delta_prime, double delta2,
                           int M, const RhoConstants& constants = {});

struct ScheduleOptions {
  bool ladder_search = true;  // grow delta until the second constraint holds
  double ladder_growth = 1.05;
};

struct Schedule {
  double eps = 0.0;
  int M = 0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double delta2 = 0.0;
  double delta_u = 0.0;
  // Both sides of delta''^5 M >= ln(1/delta_u^2) and of
  // M eps delta'' / min(u~(delta), -u~(-delta)) <= delta_u^2.
  double clock_lhs = 0.0, clock_rhs = 0.0;
  double mixing_lhs = 0.0, mixing_rhs = 0.0;
  double default_delta = 0.0;  // 1 / ln ln (1/eps)
  int ladder_steps = 0;        // 0 when the default ladder value was kept
};

/// M = round(ln 1/eps), delta = 1/ln ln(1/eps), delta' = delta^2,
/// delta'' = ((1/D) ln(1/D^2) / ln(1/eps))^(1/5) with D = u~(delta) - u~(-delta).
/// When the second constraint fails at the default delta and ladder_search
/// is on, delta is multiplied by ladder_growth until it holds. Throws
/// ScheduleError (reporting both sides) when no admissible delta exists.
Schedule schedule(const ProjectedScale& ps, double eps, const ScheduleOptions& options = {});

}  // namespace vfric
