#include "vfric/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "vfric/errors.hpp"
#include "vfric/glue.hpp"
#include "vfric/limitproc.hpp"
#include "vfric/oracle.hpp"
#include "vfric/rng.hpp"
#include "vfric/scale.hpp"
#include "vfric/stats.hpp"

namespace vfric {

using nlohmann::json;

namespace {

// Path ids of independent sample families are spaced this far apart so that their
// streams never coincide while the per-path keys stay deterministic.
constexpr std::uint64_t kFamilyStride = std::uint64_t{1} << 40;

constexpr std::size_t kNoRecord = std::numeric_limits<std::size_t>::max();

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(std::uint64_t x) { return std::to_string(x); }

// ---- config parsing -------------------------------------------------------

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

double default_rel_tol(ExperimentKind k) { return k == ExperimentKind::laplace ? 0.01 : 0.02; }

double rel_tol_of(const ExperimentConfig& cfg) { return cfg.verdict.rel_tol.value_or(default_rel_tol(cfg.kind)); }

// ---- dt policy ------------------------------------------------------------

double natural_span(const RegularizedModel& m, double lo, double hi) { return m.x_of_q(hi) - m.x_of_q(lo); }

double natural_gap(const RegularizedModel& m, double q0, double lo, double hi) {
  const double x0 = m.x_of_q(q0);
  return std::min(x0 - m.x_of_q(lo), m.x_of_q(hi) - x0);
}

// Exit statistics: the natural-scale path moves sqrt(dt) per step, so the policy ties
// sqrt(dt) to a fixed fraction of the relevant natural-scale distance.
double exit_dt(const ExperimentConfig& cfg, const RegularizedModel& m, Scheme scheme, double lo, double hi) {
  if (cfg.dt.policy == "fixed") return cfg.dt.value;
  if (scheme == Scheme::euler) return default_euler_dt(m.profile(), m.eps());
  double h = 0.0;
  switch (cfg.kind) {
    case ExperimentKind::exit_time:
    case ExperimentKind::laplace:
      h = natural_gap(m, cfg.q0, lo, hi) / 100.0;
      break;
    case ExperimentKind::mixing_uniformity: {
      // The angular clock runs at 1/eps^2 on the flat stretch, whose natural-scale
      // width is only eps * (flat length); a coarse step there biases the clock
      // and shows up as excess mass near the starting angle.
      const auto& p = m.profile();
      const double flat_width = m.x_of_q(p.flat_hi) - m.x_of_q(p.flat_lo);
      h = std::min(natural_span(m, lo, hi) / 200.0, flat_width / 20.0);
      break;
    }
    default:
      h = natural_span(m, lo, hi) / 100.0;
      break;
  }
  return h * h;
}

double marginal_dt(const ExperimentConfig& cfg, const RegularizedModel& m, Scheme scheme) {
  if (cfg.dt.policy == "fixed") return cfg.dt.value;
  if (scheme == Scheme::euler) return default_euler_dt(m.profile(), m.eps());
  return 1e-3;
}

json verdict(bool passed, json tolerance) { return json{{"passed", passed}, {"tolerance", std::move(tolerance)}}; }

// ---- experiment kinds -----------------------------------------------------

struct Context {
  const ExperimentConfig& cfg;
  FrictionProfile profile;
  json results = json::array();
  json inputs = json::array();
  SampleTable samples;
  bool passed = true;

  Context(const ExperimentConfig& c, FrictionProfile p) : cfg(c), profile(std::move(p)) {}

  void add(json result) {
    passed = passed && result.at("verdict").at("passed").get<bool>();
    results.push_back(std::move(result));
  }
};

void run_exit_prob(Context& c) {
  const auto& cfg = c.cfg;
  const double z = cfg.verdict.sigma;
  for (double eps : cfg.eps) {
    const RegularizedModel m(c.profile, eps);
    const double oracle = exit_probability(m.scale(), cfg.q0, cfg.lo, cfg.hi);
    c.inputs.push_back({{"eps", eps},
                        {"u_lo", m.scale().u(cfg.lo)},
                        {"u_q0", m.scale().u(cfg.q0)},
                        {"u_hi", m.scale().u(cfg.hi)},
                        {"oracle_exit_probability", oracle}});
    std::vector<double> p_hat, se;
    for (std::size_t k = 0; k < cfg.schemes.size(); ++k) {
      const Scheme scheme = cfg.schemes[k];
      const double dt = exit_dt(cfg, m, scheme, cfg.lo, cfg.hi);
      const auto recs = parallel_map(cfg.paths, cfg.workers, [&](std::size_t i) {
        RngStream r(cfg.seed, k * kFamilyStride + i, Component::y_noise);
        return first_exit(m, cfg.q0, cfg.lo, cfg.hi, dt, scheme, r);
      });
      std::size_t upper = 0;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const bool up = recs[i].which == Level::upper;
        upper += up ? 1 : 0;
        c.samples.rows.push_back({num(eps), to_string(scheme), num(std::uint64_t{i}), up ? "1" : "0",
                                  num(recs[i].time)});
      }
      const auto n = static_cast<double>(cfg.paths);
      const double p = static_cast<double>(upper) / n;
      const Interval ci = binomial_ci_z(upper, cfg.paths, z);
      const double oracle_se = std::sqrt(oracle * (1.0 - oracle) / n);
      p_hat.push_back(p);
      se.push_back(std::sqrt(p * (1.0 - p) / n));
      c.add({{"name", "exit_probability"},
             {"eps", eps},
             {"scheme", to_string(scheme)},
             {"dt", dt},
             {"n", cfg.paths},
             {"estimate", p},
             {"ci", {ci.lo, ci.hi}},
             {"oracle", oracle},
             {"z_score", oracle_se > 0.0 ? (p - oracle) / oracle_se : 0.0},
             {"verdict", verdict(ci.lo <= oracle && oracle <= ci.hi,
                                 {{"rule", "oracle inside Wilson interval"}, {"sigma", z}})}});
    }
    if (cfg.schemes.size() == 2) {
      const double joint = std::sqrt(se[0] * se[0] + se[1] * se[1]);
      const double diff = p_hat[0] - p_hat[1];
      c.add({{"name", "scheme_agreement"},
             {"eps", eps},
             {"schemes", {to_string(cfg.schemes[0]), to_string(cfg.schemes[1])}},
             {"difference", diff},
             {"joint_std_error", joint},
             {"z_score", joint > 0.0 ? diff / joint : 0.0},
             {"verdict", verdict(std::abs(diff) <= z * joint, {{"rule", "|p1 - p2| <= sigma * joint SE"}, {"sigma", z}})}});
    }
  }
}

// Richardson combination for a leading error term proportional to sqrt(dt).
double richardson(double fine, double coarse, double ratio) {
  const double r = std::sqrt(ratio);
  return (r * fine - coarse) / (r - 1.0);
}

struct StridedExit {
  double t[3] = {0.0, 0.0, 0.0};
};

void run_exit_functional(Context& c) {
  const auto& cfg = c.cfg;
  const bool laplace = cfg.kind == ExperimentKind::laplace;
  const double z = cfg.verdict.sigma;
  const double tol = rel_tol_of(cfg);
  const double r1 = static_cast<double>(cfg.strides[1]) / static_cast<double>(cfg.strides[0]);
  const double r2 = static_cast<double>(cfg.strides[2]) / static_cast<double>(cfg.strides[1]);

  for (double eps : cfg.eps) {
    const RegularizedModel m(c.profile, eps);
    const double dt = exit_dt(cfg, m, Scheme::natural_scale, cfg.lo, cfg.hi);
    const auto recs = parallel_map(cfg.paths, cfg.workers, [&](std::size_t i) {
      RngStream r(cfg.seed, i, Component::y_noise);
      const auto ex = first_exit_strided(m, cfg.q0, cfg.lo, cfg.hi, dt, cfg.strides, r);
      StridedExit s;
      for (int k = 0; k < 3; ++k) s.t[k] = ex[static_cast<std::size_t>(k)].time;
      return s;
    });
    for (std::size_t i = 0; i < recs.size(); ++i) {
      c.samples.rows.push_back({num(eps), num(std::uint64_t{i}), num(recs[i].t[0]), num(recs[i].t[1]),
                                num(recs[i].t[2])});
    }

    json input = {{"eps", eps},
                  {"dt", dt},
                  {"strides", cfg.strides},
                  {"u_lo", m.scale().u(cfg.lo)},
                  {"u_q0", m.scale().u(cfg.q0)},
                  {"u_hi", m.scale().u(cfg.hi)}};

    auto evaluate = [&](const std::string& name, double oracle, auto&& f, json extra) {
      std::vector<double> raw[3], fine(recs.size()), coarse(recs.size());
      for (auto& v : raw) v.resize(recs.size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        for (int k = 0; k < 3; ++k) raw[k][i] = f(recs[i].t[k]);
        fine[i] = richardson(raw[0][i], raw[1][i], r1);
        coarse[i] = richardson(raw[1][i], raw[2][i], r2);
      }
      const MeanEstimate est = mean_estimate(fine);
      const MeanEstimate est_coarse = mean_estimate(coarse);
      json means = json::array();
      for (auto& v : raw) means.push_back(mean_estimate(v).mean);
      const double rel_err = std::abs(est.mean - oracle) / std::abs(oracle);
      const double bias = std::abs(est.mean - est_coarse.mean);
      json result = {{"name", name},
                     {"eps", eps},
                     {"dt", dt},
                     {"n", cfg.paths},
                     {"estimate", est.mean},
                     {"std_error", est.std_error},
                     {"ci", {est.mean - z * est.std_error, est.mean + z * est.std_error}},
                     {"raw_means", means},
                     {"extrapolated_coarse", est_coarse.mean},
                     {"oracle", oracle},
                     {"relative_error", rel_err},
                     {"residual_bias_estimate", bias},
                     {"verdict", verdict(rel_err <= tol && bias <= z * est.std_error,
                                         {{"rule", "relative error <= rel_tol and |fine - coarse extrapolation| <= "
                                                   "sigma * SE"},
                                          {"rel_tol", tol},
                                          {"sigma", z}})}};
      result.update(extra);
      c.add(std::move(result));
    };

    if (!laplace) {
      const double oracle = expected_exit_time(m.scale(), cfg.q0, cfg.lo, cfg.hi);
      input["oracle_expected_exit_time"] = oracle;
      evaluate("expected_exit_time", oracle, [](double t) { return t; }, json::object());
    } else {
      json oracles = json::object();
      for (double lam : cfg.lambdas) {
        const double oracle = laplace_exit_time(m.scale(), lam, cfg.q0, cfg.lo, cfg.hi);
        oracles[num(lam)] = oracle;
        evaluate("laplace_transform", oracle, [lam](double t) { return std::exp(-lam * t); },
                 json{{"lambda", lam}});
      }
      input["oracle_laplace"] = oracles;
    }
    c.inputs.push_back(std::move(input));
  }
}

void run_mixing(Context& c) {
  const auto& cfg = c.cfg;
  const double z = cfg.verdict.sigma;
  const ProjectedScale ps(c.profile);
  for (double eps : cfg.eps) {
    const Schedule s = schedule(ps, eps);
    const MixingBounds mb = mixing_bounds(ps, eps, s.delta, s.delta_prime, s.delta2, s.M);
    const double lo = -(1.0 + s.delta), hi = 1.0 + s.delta;
    const RegularizedModel m(c.profile, eps);
    const Scheme scheme = cfg.schemes.front();
    const double dt = exit_dt(cfg, m, scheme, lo, hi);
    const auto recs = parallel_map(cfg.paths, cfg.workers, [&](std::size_t i) {
      RngStream ry(cfg.seed, i, Component::y_noise);
      RngStream rth(cfg.seed, i, Component::theta_noise);
      return first_exit_2d(m, cfg.theta0, cfg.q0, lo, hi, dt, scheme, ry, rth);
    });
    std::vector<double> thetas(recs.size());
    std::size_t upper = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      thetas[i] = recs[i].theta;
      const bool up = recs[i].which == Level::upper;
      upper += up ? 1 : 0;
      c.samples.rows.push_back({num(eps), num(std::uint64_t{i}), num(recs[i].theta), up ? "1" : "0",
                                num(recs[i].time), num(recs[i].clock)});
    }
    const ChiSquareResult chi = chi_square_uniform(thetas, cfg.bins);
    const auto n = static_cast<double>(cfg.paths);
    const double cell = 1.0 / static_cast<double>(cfg.bins);
    double max_dev = 0.0;
    for (auto k : chi.counts) max_dev = std::max(max_dev, std::abs(static_cast<double>(k) / n - cell));
    const double u0 = ps.u_tilde(0.0);
    const double explicit_budget = 2.0 * mb.omega + (ps.u_tilde(s.delta_prime) - u0) / mb.delta_u;
    const double noise = z * std::sqrt(cell * (1.0 - cell) / n);
    const double split_oracle = (u0 - ps.u_tilde(-s.delta)) / mb.delta_u;

    c.inputs.push_back({{"eps", eps},
                        {"dt", dt},
                        {"scheme", to_string(scheme)},
                        {"schedule",
                         {{"M", s.M},
                          {"delta", s.delta},
                          {"delta_prime", s.delta_prime},
                          {"delta2", s.delta2},
                          {"delta_u", s.delta_u},
                          {"default_delta", s.default_delta},
                          {"ladder_steps", s.ladder_steps}}},
                        {"bounds",
                         {{"p_alpha", mb.p_alpha},
                          {"p_beta", mb.p_beta},
                          {"p_count", mb.p_count},
                          {"omega", mb.omega},
                          {"alpha_ratio", mb.alpha_ratio},
                          {"beta_ratio", mb.beta_ratio}}},
                        {"u_tilde", {{"minus_delta", ps.u_tilde(-s.delta)}, {"zero", u0}, {"delta", ps.u_tilde(s.delta)}}},
                        {"levels", {lo, hi}}});
    c.add({{"name", "angular_chi_square"},
           {"eps", eps},
           {"n", cfg.paths},
           {"bins", cfg.bins},
           {"statistic", chi.statistic},
           {"p_value", chi.p_value},
           {"dof", chi.dof},
           {"counts", chi.counts},
           {"verdict", verdict(chi.p_value >= cfg.verdict.p_min, {{"rule", "p >= p_min"}, {"p_min", cfg.verdict.p_min}})}});
    c.add({{"name", "angular_max_bin_deviation"},
           {"eps", eps},
           {"estimate", max_dev},
           {"budget_explicit", explicit_budget},
           {"statistical_allowance", noise},
           {"verdict", verdict(max_dev <= explicit_budget + noise,
                               {{"rule", "max |bin freq - 1/bins| <= 2 Omega + (u~(delta') - u~(0)) / Delta + sigma * "
                                         "binomial SE"},
                                {"sigma", z}})}});
    const Interval ci = binomial_ci_z(upper, cfg.paths, z);
    c.add({{"name", "upper_exit_fraction"},
           {"eps", eps},
           {"estimate", static_cast<double>(upper) / n},
           {"ci", {ci.lo, ci.hi}},
           {"oracle", split_oracle},
           {"informational", true},
           {"verdict", verdict(true, {{"rule", "informational; limit value carries an O(Delta^2) error"}})}});
  }
}

double projected_final_1d(const FrictionProfile& p, const PathRecord& r) { return project_1d(p, r.q.back()).y; }

void run_eps_convergence(Context& c) {
  const auto& cfg = c.cfg;
  const Scheme scheme = cfg.schemes.front();
  std::vector<std::vector<double>> marginals;
  for (double eps : cfg.eps) {
    const RegularizedModel m(c.profile, eps);
    const double dt = marginal_dt(cfg, m, scheme);
    // Common random numbers across eps: path i uses the same stream at every eps.
    auto ys = parallel_map(cfg.paths, cfg.workers, [&](std::size_t i) {
      RngStream r(cfg.seed, i, Component::y_noise);
      return projected_final_1d(c.profile, simulate_path_1d(m, cfg.q0, cfg.T, dt, scheme, r, kNoRecord));
    });
    for (std::size_t i = 0; i < ys.size(); ++i) {
      c.samples.rows.push_back({"eps", num(eps), num(std::uint64_t{i}), num(ys[i])});
    }
    c.inputs.push_back({{"eps", eps}, {"dt", dt}, {"scheme", to_string(scheme)}, {"T", cfg.T}});
    marginals.push_back(std::move(ys));
  }
  json ks = json::array();
  std::vector<double> stats;
  for (std::size_t k = 0; k + 1 < marginals.size(); ++k) {
    const TestResult t = ks_two_sample(marginals[k], marginals[k + 1]);
    stats.push_back(t.statistic);
    ks.push_back({{"eps_a", cfg.eps[k]}, {"eps_b", cfg.eps[k + 1]}, {"statistic", t.statistic}, {"p_value", t.p_value}});
  }
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < stats.size(); ++k) decreasing = decreasing && stats[k + 1] < stats[k];
  c.add({{"name", "ks_trend"},
         {"n", cfg.paths},
         {"ks", ks},
         {"verdict", verdict(decreasing, {{"rule", "KS between consecutive eps strictly decreasing"}})}});
}

void run_limit_vs_eps(Context& c) {
  const auto& cfg = c.cfg;
  const double eps = cfg.eps.back();
  const RegularizedModel m(c.profile, eps);
  const ProjectedScale ps(c.profile);
  const double dt = marginal_dt(cfg, m, Scheme::natural_scale);
  const double y0 = project_1d(c.profile, cfg.q0).y;
  const ConePoint p0 = project_2d(c.profile, cfg.theta0, cfg.q0);

  auto family = [&](std::uint64_t id, auto&& draw) {
    return parallel_map(cfg.paths, cfg.workers, [&](std::size_t i) {
      RngStream ry(cfg.seed, id * kFamilyStride + i, Component::y_noise);
      RngStream rth(cfg.seed, id * kFamilyStride + i, Component::theta_noise);
      return draw(ry, rth);
    });
  };
  const auto eps_1d = family(0, [&](RngStream& ry, RngStream&) {
    return projected_final_1d(c.profile, simulate_path_1d(m, cfg.q0, cfg.T, dt, Scheme::natural_scale, ry, kNoRecord));
  });
  const auto lim_1d = family(1, [&](RngStream& ry, RngStream&) {
    return simulate_limit_1d(ps, y0, cfg.T, dt, ry, kNoRecord).y.back();
  });
  const auto eps_cone = family(2, [&](RngStream& ry, RngStream& rth) {
    return projected_final_1d(
        c.profile, simulate_path_2d(m, cfg.theta0, cfg.q0, cfg.T, dt, Scheme::natural_scale, ry, rth, kNoRecord));
  });
  const auto lim_cone = family(3, [&](RngStream& ry, RngStream& rth) {
    return simulate_limit_cone(ps, p0, cfg.T, dt, ry, rth, kNoRecord).points.back().y();
  });

  const std::pair<const char*, const std::vector<double>*> sources[] = {
      {"eps_1d", &eps_1d}, {"limit_1d", &lim_1d}, {"eps_cone", &eps_cone}, {"limit_cone", &lim_cone}};
  for (const auto& [name, ys] : sources) {
    const double e = std::string(name).rfind("eps", 0) == 0 ? eps : 0.0;
    for (std::size_t i = 0; i < ys->size(); ++i) {
      c.samples.rows.push_back({name, num(e), num(std::uint64_t{i}), num((*ys)[i])});
    }
  }
  c.inputs.push_back({{"eps", eps}, {"dt", dt}, {"T", cfg.T}, {"y0", y0}});
  const double ks_max = cfg.verdict.ks_max;
  auto compare = [&](const char* name, const std::vector<double>& a, const std::vector<double>& b) {
    const TestResult t = ks_two_sample(a, b);
    c.add({{"name", name},
           {"eps", eps},
           {"n", cfg.paths},
           {"statistic", t.statistic},
           {"p_value", t.p_value},
           {"verdict", verdict(t.statistic <= ks_max, {{"rule", "KS statistic <= ks_max"}, {"ks_max", ks_max}})}});
  };
  compare("ks_limit_1d", eps_1d, lim_1d);
  compare("ks_limit_cone_radial", eps_cone, lim_cone);
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::exit_prob: return "exit_prob";
    case ExperimentKind::exit_time: return "exit_time";
    case ExperimentKind::laplace: return "laplace";
    case ExperimentKind::mixing_uniformity: return "mixing_uniformity";
    case ExperimentKind::eps_convergence: return "eps_convergence";
    case ExperimentKind::limit_vs_eps: return "limit_vs_eps";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::exit_prob, ExperimentKind::exit_time, ExperimentKind::laplace,
                 ExperimentKind::mixing_uniformity, ExperimentKind::eps_convergence, ExperimentKind::limit_vs_eps}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

FrictionProfile ProfileSpec::build() const {
  FrictionProfile p = name == "asymmetric" ? asymmetric_profile(a, b, bottom_scale) : make_profile(name, a, b);
  if (drift != 0.0) p = with_constant_drift(std::move(p), drift);
  return p;
}

void ExperimentConfig::validate() const {
  if (paths < 100) throw ConfigError("paths must be at least 100");
  if (eps.empty()) throw ConfigError("eps list is empty");
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eps values must be positive");
  }
  if (schemes.empty() || schemes.size() > 2) throw ConfigError("give one or two schemes");
  if (dt.policy != "auto" && dt.policy != "fixed") throw ConfigError("dt.policy must be 'auto' or 'fixed'");
  if (dt.policy == "fixed" && !(dt.value > 0.0)) throw ConfigError("fixed dt must be positive");
  if (!(verdict.sigma > 0.0)) throw ConfigError("verdict.sigma must be positive");
  if (!(verdict.p_min > 0.0 && verdict.p_min < 1.0)) throw ConfigError("verdict.p_min must lie in (0,1)");
  if (verdict.rel_tol && !(*verdict.rel_tol > 0.0)) throw ConfigError("verdict.rel_tol must be positive");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  switch (kind) {
    case ExperimentKind::exit_prob:
      if (!(lo < q0 && q0 < hi)) throw ConfigError("need lo < q0 < hi");
      break;
    case ExperimentKind::exit_time:
    case ExperimentKind::laplace:
      if (!(lo < q0 && q0 < hi)) throw ConfigError("need lo < q0 < hi");
      if (schemes.size() != 1 || schemes.front() != Scheme::natural_scale) {
        throw ConfigError("exit_time and laplace run on the natural_scale scheme only");
      }
      if (strides.size() != 3 || !(strides[0] >= 1 && strides[0] < strides[1] && strides[1] < strides[2])) {
        throw ConfigError("strides must be three increasing positive integers");
      }
      if (kind == ExperimentKind::laplace) {
        if (lambdas.empty()) throw ConfigError("lambdas list is empty");
        for (double l : lambdas) {
          if (!(l > 0.0)) throw ConfigError("lambdas must be positive");
        }
      }
      break;
    case ExperimentKind::mixing_uniformity:
      if (bins < 2) throw ConfigError("bins must be at least 2");
      if (paths < 10 * bins) throw ConfigError("paths must be at least 10 * bins");
      break;
    case ExperimentKind::eps_convergence:
      if (eps.size() < 3) throw ConfigError("eps_convergence needs at least three eps values");
      [[fallthrough]];
    case ExperimentKind::limit_vs_eps:
      for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
        if (!(eps[k + 1] < eps[k])) throw ConfigError("eps list must be strictly decreasing");
      }
      break;
  }
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"kind", "profile", "eps", "paths", "seed", "schemes", "scheme", "dt", "start", "levels", "lambdas", "T",
                  "bins", "strides", "verdict", "strict", "workers", "output"},
                 "config");
  ExperimentConfig c;
  if (!j.contains("kind")) throw ConfigError("config needs a 'kind'");
  c.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    reject_unknown(p, {"name", "a", "b", "bottom_scale", "drift"}, "profile");
    read(p, "name", c.profile.name);
    read(p, "a", c.profile.a);
    read(p, "b", c.profile.b);
    read(p, "bottom_scale", c.profile.bottom_scale);
    read(p, "drift", c.profile.drift);
  }
  if (j.contains("eps")) {
    if (j.at("eps").is_number()) {
      c.eps = {j.at("eps").get<double>()};
    } else {
      read(j, "eps", c.eps);
    }
  }
  read(j, "paths", c.paths);
  if (!j.contains("seed")) throw ConfigError("config needs a 'seed'");
  read(j, "seed", c.seed);
  if (j.contains("scheme") && j.contains("schemes")) throw ConfigError("give either 'scheme' or 'schemes'");
  std::vector<std::string> names;
  if (j.contains("scheme")) names = {j.at("scheme").get<std::string>()};
  read(j, "schemes", names);
  if (!names.empty()) {
    c.schemes.clear();
    for (const auto& n : names) {
      try {
        c.schemes.push_back(parse_scheme(n));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("dt")) {
    const auto& d = j.at("dt");
    if (d.is_number()) {
      c.dt = {"fixed", d.get<double>()};
    } else {
      reject_unknown(d, {"policy", "value"}, "dt");
      read(d, "policy", c.dt.policy);
      read(d, "value", c.dt.value);
    }
  }
  if (j.contains("start")) {
    const auto& s = j.at("start");
    reject_unknown(s, {"q", "theta"}, "start");
    read(s, "q", c.q0);
    read(s, "theta", c.theta0);
  }
  if (j.contains("levels")) {
    const auto& l = j.at("levels");
    reject_unknown(l, {"lo", "hi"}, "levels");
    read(l, "lo", c.lo);
    read(l, "hi", c.hi);
  }
  read(j, "lambdas", c.lambdas);
  read(j, "T", c.T);
  read(j, "bins", c.bins);
  read(j, "strides", c.strides);
  if (j.contains("verdict")) {
    const auto& v = j.at("verdict");
    reject_unknown(v, {"sigma", "p_min", "rel_tol", "ks_max"}, "verdict");
    read(v, "sigma", c.verdict.sigma);
    read(v, "p_min", c.verdict.p_min);
    if (v.contains("rel_tol")) {
      double t = 0.0;
      read(v, "rel_tol", t);
      c.verdict.rel_tol = t;
    }
    read(v, "ks_max", c.verdict.ks_max);
  }
  read(j, "strict", c.strict);
  read(j, "workers", c.workers);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, {"dir"}, "output");
    read(o, "dir", c.out_dir);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json schemes = json::array();
  for (auto s : cfg.schemes) schemes.push_back(to_string(s));
  json verdict = {{"sigma", cfg.verdict.sigma}, {"p_min", cfg.verdict.p_min}, {"ks_max", cfg.verdict.ks_max}};
  if (cfg.verdict.rel_tol) verdict["rel_tol"] = *cfg.verdict.rel_tol;
  // workers and output.dir are deliberately left out: they do not affect results.
  return {{"kind", to_string(cfg.kind)},
          {"profile",
           {{"name", cfg.profile.name},
            {"a", cfg.profile.a},
            {"b", cfg.profile.b},
            {"bottom_scale", cfg.profile.bottom_scale},
            {"drift", cfg.profile.drift}}},
          {"eps", cfg.eps},
          {"paths", cfg.paths},
          {"seed", cfg.seed},
          {"schemes", schemes},
          {"dt", {{"policy", cfg.dt.policy}, {"value", cfg.dt.value}}},
          {"start", {{"q", cfg.q0}, {"theta", cfg.theta0}}},
          {"levels", {{"lo", cfg.lo}, {"hi", cfg.hi}}},
          {"lambdas", cfg.lambdas},
          {"T", cfg.T},
          {"bins", cfg.bins},
          {"strides", cfg.strides},
          {"verdict", verdict},
          {"strict", cfg.strict}};
}

ExperimentConfig effective_config(const ExperimentConfig& cfg) {
  ExperimentConfig e = cfg;
  if (cfg.strict) {
    e.verdict.sigma = std::max(cfg.verdict.sigma, 4.0);
    e.paths = cfg.paths * 4;
  }
  return e;
}

std::vector<std::string> sample_columns(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::exit_prob: return {"eps", "scheme", "path", "exit_upper", "exit_time"};
    case ExperimentKind::exit_time:
    case ExperimentKind::laplace: return {"eps", "path", "time_fine", "time_mid", "time_coarse"};
    case ExperimentKind::mixing_uniformity: return {"eps", "path", "theta", "exit_upper", "exit_time", "clock"};
    case ExperimentKind::eps_convergence:
    case ExperimentKind::limit_vs_eps: return {"source", "eps", "path", "y_T"};
  }
  return {};
}

void SampleTable::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

std::string StatsReport::to_string() const { return doc.dump(2) + "\n"; }

StatsReport run_experiment(const ExperimentConfig& raw) {
  const auto t0 = std::chrono::steady_clock::now();
  raw.validate();
  const ExperimentConfig cfg = effective_config(raw);

  StatsReport report;
  report.samples.columns = sample_columns(cfg.kind);
  json doc = {{"schema_version", kReportSchemaVersion},
              {"kind", to_string(cfg.kind)},
              {"seed", cfg.seed},
              {"config", config_to_json(raw)},
              {"effective", {{"paths", cfg.paths}, {"sigma", cfg.verdict.sigma}}},
              {"samples_file", "samples.csv"},
              {"samples_columns", report.samples.columns}};
  try {
    Context c(cfg, cfg.profile.build());
    switch (cfg.kind) {
      case ExperimentKind::exit_prob: run_exit_prob(c); break;
      case ExperimentKind::exit_time:
      case ExperimentKind::laplace: run_exit_functional(c); break;
      case ExperimentKind::mixing_uniformity: run_mixing(c); break;
      case ExperimentKind::eps_convergence: run_eps_convergence(c); break;
      case ExperimentKind::limit_vs_eps: run_limit_vs_eps(c); break;
    }
    doc["inputs"] = std::move(c.inputs);
    doc["results"] = std::move(c.results);
    doc["error"] = nullptr;
    report.samples.rows = std::move(c.samples.rows);
    report.passed = c.passed;
  } catch (const std::exception& e) {
    const bool ours = dynamic_cast<const Error*>(&e) != nullptr;
    doc["inputs"] = json::array();
    doc["results"] = json::array();
    doc["error"] = {{"type", ours ? "vfric::Error" : "std::exception"}, {"message", e.what()}};
    report.samples.rows.clear();
    report.passed = false;
  }
  doc["passed"] = report.passed;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  doc["runtime"] = {{"wall_seconds", wall}, {"workers", cfg.workers}};
  report.doc = std::move(doc);
  return report;
}

void write_outputs(const StatsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw ConfigError("cannot write " + (dir / "report.json").string());
    out << report.to_string();
  }
  std::ofstream out(dir / "samples.csv");
  if (!out) throw ConfigError("cannot write " + (dir / "samples.csv").string());
  report.samples.write_csv(out);
}

}  // namespace vfric
