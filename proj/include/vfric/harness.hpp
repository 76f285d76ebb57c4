#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "vfric/friction.hpp"
#include "vfric/sde.hpp"

namespace vfric {

/// Version of the report.json / samples.csv layout. Bump on any column or key change.
inline constexpr const char* kReportSchemaVersion = "1.0";

enum class ExperimentKind { exit_prob, exit_time, laplace, mixing_uniformity, eps_convergence, limit_vs_eps };

const char* to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& name);

struct ProfileSpec {
  std::string name = "quadratic";
  double a = -2.0;
  double b = 2.0;
  double bottom_scale = 4.0;  // asymmetric profile only
  double drift = 0.0;         // constant b(q); 0 means none

  FrictionProfile build() const;
};

struct DtPolicy {
  std::string policy = "auto";  // "auto" or "fixed"
  double value = 0.0;
};

struct VerdictSettings {
  double sigma = 3.0;       // width of CIs and z-tests
  double p_min = 0.01;      // minimum p-value for goodness-of-fit tests
  std::optional<double> rel_tol;  // exit_time: 0.02, laplace: 0.01 when unset
  double ks_max = 0.05;     // limit_vs_eps KS ceiling
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::exit_prob;
  ProfileSpec profile;
  std::vector<double> eps{0.1};
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  std::vector<Scheme> schemes{Scheme::natural_scale};
  DtPolicy dt;
  double q0 = 0.0;
  double theta0 = 0.0;
  double lo = -3.0;
  double hi = 3.0;
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  double T = 1.0;
  std::size_t bins = 16;
  std::vector<std::size_t> strides{1, 4, 16};
  VerdictSettings verdict;
  bool strict = false;
  std::size_t workers = 1;
  std::string out_dir = ".";

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses the nested JSON config; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Effective settings after --strict: 4 sigma and four times the paths.
ExperimentConfig effective_config(const ExperimentConfig& cfg);

struct SampleTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const;
};

struct StatsReport {
  nlohmann::json doc;  // deterministic part: everything except doc["runtime"]
  SampleTable samples;
  bool passed = false;

  std::string to_string() const;  // pretty JSON text
};

/// Columns of samples.csv for a given experiment kind.
std::vector<std::string> sample_columns(ExperimentKind k);

StatsReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json and samples.csv into dir (created if missing).
void write_outputs(const StatsReport& report, const std::filesystem::path& dir);

/// Evaluates f(0..n-1) on up to `workers` threads and returns the results in index order.
/// Exceptions are rethrown after all workers stopped; the one from the lowest index wins.
template <class F>
auto parallel_map(std::size_t n, std::size_t workers, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(n);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  constexpr std::size_t chunk = 64;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n > 0 ? (n + chunk - 1) / chunk : 0);
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      const std::size_t begin = c * chunk;
      if (begin >= n) return;
      try {
        for (std::size_t i = begin; i < std::min(n, begin + chunk); ++i) out[i] = f(i);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace vfric
