#pragma once

#include "opm/ipda.hpp"
#include "opm/scenario.hpp"
#include "opm/single_target_filter.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace opm {

/// Invalid benchmark configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProposedSettings {
  double a_df = 0.2;
  double a_omega = 0.01;
  double a_alpha = 0.5;
  double tau_p = 1e-4;
  double tau_m = 3.22;
};

struct BaselineSettings {
  double p_d = 0.8;
  double p_s = 0.99;
  double p_b = 0.5;
  double tau_p = 1e-5;
  double tau_m = 3.22;
};

struct BenchConfig {
  ScenarioConfig scenario;
  ProposedSettings proposed;
  BaselineSettings baseline;
  /// Velocity std of newly appearing objects, shared by both filters (m/s).
  double birth_vel_std = 1.0;
  std::vector<double> lambda_list{1.0, 5.0, 10.0};
  std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  int n_runs = 100;
  std::uint64_t base_seed = 1;
  double c_err = 5.0;
  /// 0 = use the hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError.
  void validate() const;

  /// Small pinned configuration used by `bench demo`.
  static BenchConfig demo();
};

/// Reads a flat JSON object whose keys mirror the BenchConfig field names
/// (scenario fields at top level). Unknown keys are rejected.
[[nodiscard]] BenchConfig parse_bench_config(const std::string& json_text, const BenchConfig& defaults = {});
[[nodiscard]] BenchConfig load_bench_config(const std::filesystem::path& path, const BenchConfig& defaults = {});

/// Both filters as configured for one clutter rate.
[[nodiscard]] SingleTargetParams proposed_params(const BenchConfig& cfg);
[[nodiscard]] IpdaParams baseline_params(const BenchConfig& cfg, double lambda);

/// Error curve of one filter at one clutter rate and threshold.
struct Curve {
  std::string filter;  ///< "proposed" or "baseline"
  double lambda = 0.0;
  double threshold = 0.0;
  std::vector<double> mean_error;     ///< mean e_t over runs, t = 0..t_end
  std::vector<double> declared_rate;  ///< fraction of runs with an estimate at t

  [[nodiscard]] double time_averaged_error() const;
  /// Expected number of steps after t_death with an estimate still declared.
  [[nodiscard]] double post_death_declared(int t_death) const;
};

struct BenchResult {
  std::vector<Curve> curves;
  int n_runs = 0;
  std::uint64_t base_seed = 0;
  int t_death = 0;
  double c_err = 0.0;
};

/// Runs every (lambda, run) scenario once and feeds the identical observation
/// record to both filters. All thresholds are evaluated on the same filter
/// outputs. Deterministic for a given configuration regardless of thread count.
[[nodiscard]] BenchResult run_benchmark(const BenchConfig& cfg);

/// Header: filter,lambda,threshold,t,mean_error,n_runs,seed
void write_curves_csv(std::ostream& os, const BenchResult& result);
/// Header: filter,lambda,threshold,time_avg_error,post_death_declared,c_err,n_runs,seed
void write_summary_csv(std::ostream& os, const BenchResult& result);

struct CurveRow {
  std::string filter;
  double lambda = 0.0;
  double threshold = 0.0;
  int t = 0;
  double mean_error = 0.0;
  int n_runs = 0;
  std::uint64_t seed = 0;
};

/// Reads back what write_curves_csv produced. Throws InputError on malformed input.
[[nodiscard]] std::vector<CurveRow> parse_curves_csv(std::istream& is);

/// Writes curves.csv and summary.csv into dir (created if needed).
/// Throws std::runtime_error naming the path on I/O failure.
void emit_results(const BenchResult& result, const std::filesystem::path& dir);

}  // namespace opm
