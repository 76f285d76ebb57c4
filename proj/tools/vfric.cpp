// vfric: command-line front end for the vanishing-friction simulation lab.
//
// Exit codes: 0 pass, 1 run failure or failed verdict, 2 usage/config error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfric/errors.hpp"
#include "vfric/friction.hpp"
#include "vfric/glue.hpp"
#include "vfric/harness.hpp"
#include "vfric/limitproc.hpp"
#include "vfric/oracle.hpp"
#include "vfric/rng.hpp"
#include "vfric/scale.hpp"
#include "vfric/sde.hpp"

using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("VFRIC_OUT_DIR"); env && *env) return env;
  return ".";
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (std::uint64_t{rd()} << 32) ^ rd();
  std::cerr << "seed: " << s << "\n";
  return s;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---- profile flags, shared by most subcommands -------------------------------

struct ProfileFlags {
  std::string name = "quadratic";
  double a = -2.0;
  double b = 2.0;
  double bottom_scale = 4.0;
  double drift = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--profile", name, "Friction profile: quadratic, quartic or asymmetric")->capture_default_str();
    app->add_option("--a", a, "Left end of the projected domain (a < 0)")->capture_default_str();
    app->add_option("--b", b, "Right end of the projected domain (b > 0)")->capture_default_str();
    app->add_option("--bottom-scale", bottom_scale, "Bottom-side scale factor of the asymmetric profile")
        ->capture_default_str();
    app->add_option("--drift", drift, "Constant drift b(q) (1-d euler only; 0 = none)")->capture_default_str();
  }

  vfric::FrictionProfile build() const {
    return vfric::ProfileSpec{name, a, b, bottom_scale, drift}.build();
  }
};

// ---- experiment flags: mirror config-file keys, override the file -------------

struct ExperimentFlags {
  std::string config;
  std::string out_dir;
  std::optional<std::string> kind;
  std::optional<std::string> profile;
  std::optional<double> a, b, bottom_scale, drift;
  std::optional<std::vector<double>> eps;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> schemes;
  std::optional<double> dt;
  std::optional<double> q0, theta0, lo, hi;
  std::optional<std::vector<double>> lambdas;
  std::optional<double> T;
  std::optional<std::size_t> bins;
  std::optional<std::vector<std::size_t>> strides;
  std::optional<double> sigma, p_min, rel_tol, ks_max;
  bool strict = false;
  std::optional<std::size_t> workers;

  void attach(CLI::App* app, const std::vector<std::string>& kinds) {
    app->add_option("--config", config, "JSON experiment config; flags override its keys")->check(CLI::ExistingFile);
    if (kinds.size() > 1) {
      app->add_option("--kind", kind, "Experiment kind")->check(CLI::IsMember(kinds));
    }
    app->add_option("--profile", profile, "Friction profile: quadratic, quartic or asymmetric");
    app->add_option("--a", a, "Left end of the projected domain");
    app->add_option("--b", b, "Right end of the projected domain");
    app->add_option("--bottom-scale", bottom_scale, "Bottom-side scale of the asymmetric profile");
    app->add_option("--drift", drift, "Constant drift b(q)");
    app->add_option("--eps", eps, "Comma-separated eps values")->delimiter(',');
    app->add_option("--paths", paths, "Number of Monte Carlo paths (>= 100)");
    app->add_option("--seed", seed, "Master seed (generated and printed when omitted)");
    app->add_option("--scheme", schemes, "Scheme(s): natural_scale, euler (comma-separated)")->delimiter(',');
    app->add_option("--dt", dt, "Fixed time step (default: automatic policy)");
    app->add_option("--q0", q0, "Start position q (physical coordinate)");
    app->add_option("--theta0", theta0, "Start angle (2-d runs)");
    app->add_option("--lo", lo, "Lower exit level");
    app->add_option("--hi", hi, "Upper exit level");
    app->add_option("--lambdas", lambdas, "Comma-separated Laplace parameters")->delimiter(',');
    app->add_option("--T", T, "Horizon for marginal experiments");
    app->add_option("--bins", bins, "Angular histogram bins");
    app->add_option("--strides", strides, "Three increasing dt multipliers for bias control")->delimiter(',');
    app->add_option("--sigma", sigma, "Width of confidence intervals in standard errors");
    app->add_option("--p-min", p_min, "Minimum p-value for goodness-of-fit verdicts");
    app->add_option("--rel-tol", rel_tol, "Relative tolerance for exit_time / laplace");
    app->add_option("--ks-max", ks_max, "KS ceiling for limit_vs_eps");
    app->add_flag("--strict", strict, "4-sigma verdicts with four times the paths");
    app->add_option("--workers", workers, "Worker threads (results do not depend on it)");
    app->add_option("--out-dir", out_dir, "Output directory (default: $VFRIC_OUT_DIR or .)");
  }

  // Builds the config JSON: file first, then every flag that was given.
  json merged(const std::string& default_kind) const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      try {
        j = json::parse(in, nullptr, true, true);
      } catch (const json::parse_error& e) {
        throw vfric::ConfigError("config " + config + " is not valid JSON: " + e.what());
      }
    }
    if (kind) j["kind"] = *kind;
    if (!j.contains("kind")) j["kind"] = default_kind;
    if (profile) j["profile"]["name"] = *profile;
    if (a) j["profile"]["a"] = *a;
    if (b) j["profile"]["b"] = *b;
    if (bottom_scale) j["profile"]["bottom_scale"] = *bottom_scale;
    if (drift) j["profile"]["drift"] = *drift;
    if (eps) j["eps"] = *eps;
    if (paths) j["paths"] = *paths;
    if (seed) j["seed"] = *seed;
    if (schemes) {
      j.erase("scheme");
      j["schemes"] = *schemes;
    }
    if (dt) j["dt"] = {{"policy", "fixed"}, {"value", *dt}};
    if (q0) j["start"]["q"] = *q0;
    if (theta0) j["start"]["theta"] = *theta0;
    if (lo) j["levels"]["lo"] = *lo;
    if (hi) j["levels"]["hi"] = *hi;
    if (lambdas) j["lambdas"] = *lambdas;
    if (T) j["T"] = *T;
    if (bins) j["bins"] = *bins;
    if (strides) j["strides"] = *strides;
    if (sigma) j["verdict"]["sigma"] = *sigma;
    if (p_min) j["verdict"]["p_min"] = *p_min;
    if (rel_tol) j["verdict"]["rel_tol"] = *rel_tol;
    if (ks_max) j["verdict"]["ks_max"] = *ks_max;
    if (strict) j["strict"] = true;
    if (workers) j["workers"] = *workers;
    if (!j.contains("seed")) j["seed"] = resolve_seed(std::nullopt);
    return j;
  }
};

int run_experiment_command(const ExperimentFlags& f, const json& merged) {
  const vfric::ExperimentConfig cfg = vfric::config_from_json(merged);
  std::string dir = f.out_dir;
  if (dir.empty()) dir = f.config.empty() || cfg.out_dir == "." ? default_out_dir() : cfg.out_dir;
  const vfric::StatsReport report = vfric::run_experiment(cfg);
  vfric::write_outputs(report, dir);
  for (const auto& r : report.doc.at("results")) {
    std::cout << (r.at("verdict").at("passed").get<bool>() ? "PASS " : "FAIL ") << r.at("name").get<std::string>();
    if (r.contains("eps")) std::cout << " eps=" << r.at("eps").get<double>();
    if (r.contains("scheme")) std::cout << " scheme=" << r.at("scheme").get<std::string>();
    if (r.contains("lambda")) std::cout << " lambda=" << r.at("lambda").get<double>();
    std::cout << "\n";
  }
  if (!report.doc.at("error").is_null()) {
    std::cerr << "error: " << report.doc.at("error").at("message").get<std::string>() << "\n";
  }
  std::cout << (report.passed ? "PASS" : "FAIL") << " (seed " << cfg.seed << ", report " << dir << "/report.json)\n";
  return report.passed ? kPass : kFail;
}

std::ostream* open_output(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return &std::cout;
  holder = std::make_unique<std::ofstream>(path);
  if (!*holder) throw vfric::ConfigError("cannot write " + path);
  return holder.get();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfric - regularized vanishing-friction diffusions: simulation, oracles and experiments", "vfric"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  int code = kPass;
  std::function<int()> action;

  // simulate -------------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Simulate one path of the regularized diffusion and write it as CSV");
  ProfileFlags sim_profile;
  sim_profile.attach(sim);
  double sim_eps = 0.1, sim_q0 = 0.0, sim_theta0 = 0.0, sim_T = 1.0, sim_dt = 1e-4;
  int sim_dim = 1;
  std::string sim_scheme = "natural_scale", sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::uint64_t sim_path = 0;
  std::size_t sim_every = 1;
  sim->add_option("--eps", sim_eps, "Regularization eps > 0")->capture_default_str();
  sim->add_option("--dim", sim_dim, "Model dimension: 1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  sim->add_option("--q0", sim_q0, "Start position (physical coordinate)")->capture_default_str();
  sim->add_option("--theta0", sim_theta0, "Start angle (2-d)")->capture_default_str();
  sim->add_option("--T", sim_T, "Time horizon")->capture_default_str();
  sim->add_option("--dt", sim_dt, "Time step")->capture_default_str();
  sim->add_option("--scheme", sim_scheme, "natural_scale or euler")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Master seed (generated and printed when omitted)");
  sim->add_option("--path-index", sim_path, "Path index within the seeded family")->capture_default_str();
  sim->add_option("--record-every", sim_every, "Keep every k-th step (thinning)")->capture_default_str();
  sim->add_option("--out", sim_out, "Output CSV file (default: stdout)");
  sim->callback([&] {
    action = [&] {
      const vfric::RegularizedModel m(sim_profile.build(), sim_eps);
      const auto seed = resolve_seed(sim_seed);
      vfric::RngStream ry(seed, sim_path, vfric::Component::y_noise);
      std::unique_ptr<std::ofstream> holder;
      std::ostream& out = *open_output(sim_out, holder);
      out.precision(17);
      const auto scheme = vfric::parse_scheme(sim_scheme);
      if (sim_dim == 1) {
        const auto p = vfric::simulate_path_1d(m, sim_q0, sim_T, sim_dt, scheme, ry, sim_every);
        out << "t,q\n";
        for (std::size_t i = 0; i < p.times.size(); ++i) out << p.times[i] << ',' << p.q[i] << '\n';
      } else {
        vfric::RngStream rth(seed, sim_path, vfric::Component::theta_noise);
        const auto p = vfric::simulate_path_2d(m, sim_theta0, sim_q0, sim_T, sim_dt, scheme, ry, rth, sim_every);
        out << "t,theta,y,clock\n";
        for (std::size_t i = 0; i < p.times.size(); ++i) {
          out << p.times[i] << ',' << p.theta[i] << ',' << p.q[i] << ',' << p.clock[i] << '\n';
        }
      }
      return kPass;
    };
  });

  // limit-sim ------------------------------------------------------------------
  auto* lim = app.add_subcommand("limit-sim", "Simulate one path of the glued limit process and write it as CSV");
  ProfileFlags lim_profile;
  lim_profile.attach(lim);
  double lim_y0 = 0.0, lim_theta0 = 0.0, lim_T = 1.0, lim_dt = 1e-4;
  int lim_dim = 1;
  std::string lim_out;
  std::optional<std::uint64_t> lim_seed;
  std::uint64_t lim_path = 0;
  std::size_t lim_every = 1;
  lim->add_option("--dim", lim_dim, "1 for the interval, 2 for the cone")->check(CLI::IsMember({1, 2}))->capture_default_str();
  lim->add_option("--y0", lim_y0, "Start position in the projected coordinate")->capture_default_str();
  lim->add_option("--theta0", lim_theta0, "Start angle (cone; ignored at the vertex)")->capture_default_str();
  lim->add_option("--T", lim_T, "Time horizon")->capture_default_str();
  lim->add_option("--dt", lim_dt, "Time step")->capture_default_str();
  lim->add_option("--seed", lim_seed, "Master seed (generated and printed when omitted)");
  lim->add_option("--path-index", lim_path, "Path index within the seeded family")->capture_default_str();
  lim->add_option("--record-every", lim_every, "Keep every k-th step (thinning)")->capture_default_str();
  lim->add_option("--out", lim_out, "Output CSV file (default: stdout)");
  lim->callback([&] {
    action = [&] {
      const vfric::ProjectedScale ps(lim_profile.build());
      const auto seed = resolve_seed(lim_seed);
      vfric::RngStream ry(seed, lim_path, vfric::Component::y_noise);
      std::unique_ptr<std::ofstream> holder;
      std::ostream& out = *open_output(lim_out, holder);
      out.precision(17);
      if (lim_dim == 1) {
        const auto p = vfric::simulate_limit_1d(ps, lim_y0, lim_T, lim_dt, ry, lim_every);
        out << "t,y\n";
        for (std::size_t i = 0; i < p.times.size(); ++i) out << p.times[i] << ',' << p.y[i] << '\n';
      } else {
        vfric::RngStream rth(seed, lim_path, vfric::Component::theta_noise);
        const auto p = vfric::simulate_limit_cone(ps, vfric::ConePoint(lim_theta0, lim_y0), lim_T, lim_dt, ry, rth,
                                                  lim_every);
        out << "t,theta,y,clock\n";
        for (std::size_t i = 0; i < p.times.size(); ++i) {
          const auto& pt = p.points[i];
          // The angle is undefined at the vertex; the field is left empty there.
          out << p.times[i] << ',';
          if (!pt.is_vertex()) out << pt.theta();
          out << ',' << pt.y() << ',' << p.clock[i] << '\n';
        }
      }
      return kPass;
    };
  });

  // experiment subcommands -------------------------------------------------------
  struct ExperimentCommand {
    const char* name;
    const char* help;
    std::vector<std::string> kinds;
    ExperimentFlags flags;
  };
  std::vector<std::unique_ptr<ExperimentCommand>> experiments;
  experiments.push_back(std::make_unique<ExperimentCommand>(ExperimentCommand{
      "exit-stats", "Monte Carlo exit statistics against the oracles", {"exit_prob", "exit_time", "laplace"}, {}}));
  experiments.push_back(std::make_unique<ExperimentCommand>(ExperimentCommand{
      "mixing", "Angular uniformization of the 2-d model at the glued vertex", {"mixing_uniformity"}, {}}));
  experiments.push_back(std::make_unique<ExperimentCommand>(ExperimentCommand{
      "converge", "Convergence in eps of projected marginals, and comparison with the limit process",
      {"eps_convergence", "limit_vs_eps"}, {}}));
  experiments.push_back(std::make_unique<ExperimentCommand>(ExperimentCommand{
      "report", "Run any experiment described by a config file",
      {"exit_prob", "exit_time", "laplace", "mixing_uniformity", "eps_convergence", "limit_vs_eps"}, {}}));
  for (auto& e : experiments) {
    auto* sub = app.add_subcommand(e->name, e->help);
    e->flags.attach(sub, e->kinds);
    if (std::string(e->name) == "report") sub->get_option("--config")->required();
    ExperimentCommand* ec = e.get();
    sub->callback([&action, ec] {
      action = [ec] {
        if (ec->flags.kind && ec->kinds.size() == 1) throw UsageError("--kind is fixed for this subcommand");
        auto j = ec->flags.merged(ec->kinds.front());
        const auto kind = j.at("kind").get<std::string>();
        if (std::find(ec->kinds.begin(), ec->kinds.end(), kind) == ec->kinds.end()) {
          throw UsageError("experiment kind '" + kind + "' is not handled by " + ec->name);
        }
        return run_experiment_command(ec->flags, j);
      };
    });
  }

  // oracle -----------------------------------------------------------------------
  auto* orc = app.add_subcommand("oracle", "Print analytic quantities as JSON");
  orc->require_subcommand(1, 1);
  ProfileFlags orc_profile;
  double o_eps = 0.1, o_q = 0.0, o_lo = -3.0, o_hi = 3.0, o_lambda = 1.0, o_tol = 1e-6;

  auto* o_ep = orc->add_subcommand("exit-prob", "Probability of leaving (lo, hi) through hi");
  auto* o_et = orc->add_subcommand("exit-time", "Expected exit time from (lo, hi)");
  auto* o_lp = orc->add_subcommand("laplace", "Laplace transform of the exit time from (lo, hi)");
  for (auto* s : {o_ep, o_et, o_lp}) {
    orc_profile.attach(s);
    s->add_option("--eps", o_eps, "Regularization eps > 0")->capture_default_str();
    s->add_option("--q", o_q, "Start position")->capture_default_str();
    s->add_option("--lo", o_lo, "Lower level")->capture_default_str();
    s->add_option("--hi", o_hi, "Upper level")->capture_default_str();
  }
  o_lp->add_option("--lambda", o_lambda, "Laplace parameter > 0")->capture_default_str();
  o_lp->add_option("--tolerance", o_tol, "Absolute grid-refinement tolerance")->capture_default_str();
  o_ep->callback([&] {
    action = [&] {
      const vfric::ScaleEvaluator s(orc_profile.build(), o_eps);
      print_json({{"quantity", "exit_probability"}, {"eps", o_eps}, {"q", o_q}, {"lo", o_lo}, {"hi", o_hi},
                  {"value", vfric::exit_probability(s, o_q, o_lo, o_hi)}});
      return kPass;
    };
  });
  o_et->callback([&] {
    action = [&] {
      const vfric::ScaleEvaluator s(orc_profile.build(), o_eps);
      print_json({{"quantity", "expected_exit_time"}, {"eps", o_eps}, {"q", o_q}, {"lo", o_lo}, {"hi", o_hi},
                  {"value", vfric::expected_exit_time(s, o_q, o_lo, o_hi)}});
      return kPass;
    };
  });
  o_lp->callback([&] {
    action = [&] {
      const vfric::ScaleEvaluator s(orc_profile.build(), o_eps);
      vfric::LaplaceOptions opt;
      opt.tolerance = o_tol;
      print_json({{"quantity", "laplace_exit_time"}, {"eps", o_eps}, {"lambda", o_lambda}, {"q", o_q}, {"lo", o_lo},
                  {"hi", o_hi}, {"value", vfric::laplace_exit_time(s, o_lambda, o_q, o_lo, o_hi, opt)}});
      return kPass;
    };
  });

  auto* o_rs = orc->add_subcommand("resolvent", "Solve one angular mode of the cone resolvent equation");
  orc_profile.attach(o_rs);
  int r_n = 0;
  std::size_t r_cells = 4096;
  std::string r_g = "y", r_method = "green";
  bool r_values = false;
  o_rs->add_option("--n", r_n, "Angular mode")->capture_default_str();
  o_rs->add_option("--lambda", o_lambda, "Resolvent parameter > 0")->capture_default_str();
  o_rs->add_option("--cells", r_cells, "Grid cells")->capture_default_str();
  o_rs->add_option("--g", r_g, "Right-hand side G: one, y or sin")
      ->check(CLI::IsMember({"one", "y", "sin"}))
      ->capture_default_str();
  o_rs->add_option("--method", r_method, "green or direct")
      ->check(CLI::IsMember({"green", "direct"}))
      ->capture_default_str();
  o_rs->add_flag("--values", r_values, "Include the nodal solution values");
  o_rs->callback([&] {
    action = [&] {
      const vfric::ProjectedScale ps(orc_profile.build());
      std::function<double(double)> G = [](double) { return 1.0; };
      if (r_g == "y") G = [](double y) { return y; };
      if (r_g == "sin") G = [](double y) { return std::sin(y); };
      const auto method = r_method == "green" ? vfric::ResolventMethod::green : vfric::ResolventMethod::direct;
      const auto sol = vfric::resolvent_mode_solve(ps, r_n, o_lambda, G, r_cells, method);
      double gmax = 0.0;
      for (double v : sol.values) gmax = std::max(gmax, std::abs(v));
      json j = {{"quantity", "resolvent_mode"}, {"n", r_n}, {"lambda", o_lambda}, {"cells", r_cells},
                {"method", r_method}, {"residual_norm", sol.residual_norm}, {"relative_residual", sol.relative_residual}, {"wronskian", sol.wronskian},
                {"wronskian_rel_spread", sol.wronskian_rel_spread}, {"max_abs_g", gmax}};
      if (r_values) {
        j["grid"] = sol.grid;
        j["values"] = sol.values;
      }
      print_json(j);
      return kPass;
    };
  });

  auto* o_mb = orc->add_subcommand("mixing-bounds", "Closed-form lower bounds of the angular mixing estimates");
  orc_profile.attach(o_mb);
  double mb_delta = 0.2, mb_dp = 0.02, mb_d2 = 0.1;
  int mb_M = 5;
  vfric::RhoConstants mb_c;
  o_mb->add_option("--eps", o_eps, "Regularization eps > 0")->capture_default_str();
  o_mb->add_option("--delta", mb_delta, "Outer level delta")->capture_default_str();
  o_mb->add_option("--delta-prime", mb_dp, "Inner level delta'")->capture_default_str();
  o_mb->add_option("--delta2", mb_d2, "Flat-stretch return depth delta''")->capture_default_str();
  o_mb->add_option("--M", mb_M, "Crossing count M")->capture_default_str();
  o_mb->add_option("--C1", mb_c.C1, "Constant C1 of the clock term")->capture_default_str();
  o_mb->add_option("--A", mb_c.A, "Constant A of the clock term")->capture_default_str();
  o_mb->add_option("--kappa", mb_c.kappa, "Constant kappa of the clock term")->capture_default_str();
  o_mb->add_option("--C2", mb_c.C2, "Constant C2 of the exit term")->capture_default_str();
  o_mb->callback([&] {
    action = [&] {
      const vfric::ProjectedScale ps(orc_profile.build());
      const auto b = vfric::mixing_bounds(ps, o_eps, mb_delta, mb_dp, mb_d2, mb_M, mb_c);
      print_json({{"quantity", "mixing_bounds"}, {"eps", o_eps}, {"delta", mb_delta}, {"delta_prime", mb_dp},
                  {"delta2", mb_d2}, {"M", mb_M}, {"p_alpha", b.p_alpha}, {"p_beta", b.p_beta},
                  {"p_count", b.p_count}, {"omega", b.omega}, {"rho", b.rho}, {"alpha_ratio", b.alpha_ratio},
                  {"beta_ratio", b.beta_ratio}, {"delta_u", b.delta_u}, {"rho_clock", b.rho_clock},
                  {"rho_exit", b.rho_exit}});
      return kPass;
    };
  });

  auto* o_sc = orc->add_subcommand("schedule", "Parameter schedule (M, delta, delta', delta'') for a given eps");
  orc_profile.attach(o_sc);
  bool sc_no_ladder = false;
  o_sc->add_option("--eps", o_eps, "Regularization eps in (0, 1/e)")->capture_default_str();
  o_sc->add_flag("--no-ladder", sc_no_ladder, "Keep the default delta even if a constraint fails");
  o_sc->callback([&] {
    action = [&] {
      const vfric::ProjectedScale ps(orc_profile.build());
      vfric::ScheduleOptions opt;
      opt.ladder_search = !sc_no_ladder;
      const auto s = vfric::schedule(ps, o_eps, opt);
      print_json({{"quantity", "schedule"}, {"eps", s.eps}, {"M", s.M}, {"delta", s.delta},
                  {"delta_prime", s.delta_prime}, {"delta2", s.delta2}, {"delta_u", s.delta_u},
                  {"clock_lhs", s.clock_lhs}, {"clock_rhs", s.clock_rhs}, {"mixing_lhs", s.mixing_lhs},
                  {"mixing_rhs", s.mixing_rhs}, {"default_delta", s.default_delta}, {"ladder_steps", s.ladder_steps}});
      return kPass;
    };
  });

  auto* o_st = orc->add_subcommand("scale-table", "Tabulate q, u(q), v(q) as CSV");
  orc_profile.attach(o_st);
  std::size_t st_samples = 401;
  std::string st_out;
  o_st->add_option("--eps", o_eps, "Regularization eps >= 0 (0 = unregularized)")->capture_default_str();
  o_st->add_option("--samples", st_samples, "Number of rows")->capture_default_str();
  o_st->add_option("--out", st_out, "Output CSV file (default: stdout)");
  o_st->callback([&] {
    action = [&] {
      const vfric::ScaleEvaluator s(orc_profile.build(), o_eps);
      std::unique_ptr<std::ofstream> holder;
      s.write_csv(*open_output(st_out, holder), st_samples);
      return kPass;
    };
  });

  // validate-profile --------------------------------------------------------------
  auto* vp = app.add_subcommand("validate-profile", "Check the friction hypotheses on a grid");
  ProfileFlags vp_profile;
  vp_profile.attach(vp);
  std::size_t vp_grid = 10000;
  vp->add_option("--grid", vp_grid, "Number of grid points")->capture_default_str();
  vp->callback([&] {
    action = [&] {
      const auto r = vfric::validate_profile(vp_profile.build(), vp_grid);
      json checks = json::array();
      for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      print_json({{"profile", vp_profile.name}, {"all_passed", r.all_passed()}, {"checks", checks}});
      return r.all_passed() ? kPass : kFail;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (app.get_subcommands().empty()) std::cerr << app.help();
    return kUsage;
  }

  try {
    code = action ? action() : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const vfric::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return code;
}
