// Monte Carlo comparison of the possibilistic filter and the IPDA baseline.
//
//   bench run --config cfg.json [--lambda 1 5 10] [--runs N] [--seed S] [--out DIR]
//   bench demo [--seed S] [--out DIR]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime (numerical or I/O) error.
// OPM_BENCH_LOG=quiet|info|debug controls stderr verbosity (default info).

#include "opm/bench.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("OPM_BENCH_LOG");
  if (!env) return LogLevel::kInfo;
  const std::string v = env;
  if (v == "quiet") return LogLevel::kQuiet;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) std::cerr << "[bench] " << msg << '\n';
}

std::string defaults_help() {
  return
      "Config keys (flat JSON object) and defaults:\n"
      "  scenario:  dt=0.1 q_accel=1.5 r_obs=0.25 p_detect=0.8 fp_lo=-10 fp_hi=10\n"
      "             t_birth=3 t_death=22 t_end=25 init_vel_std=0.1\n"
      "  proposed:  a_df=0.2 a_omega=0.01 a_alpha=0.5 tau_p=1e-4 tau_m=3.22\n"
      "  baseline:  p_d=0.8 p_s=0.99 p_b=0.5 tau_p_baseline=1e-5 tau_m_baseline=3.22\n"
      "  shared:    birth_vel_std=1 lambda_list=[1,5,10] thresholds=[0.1..0.8 step 0.1]\n"
      "             n_runs=100 base_seed=1 c_err=5 threads=0 (all cores)\n";
}

int execute(const opm::BenchConfig& cfg, const std::string& out_dir) {
  log(LogLevel::kInfo, "runs=" + std::to_string(cfg.n_runs) + " seed=" + std::to_string(cfg.base_seed) +
                           " c_err=" + std::to_string(cfg.c_err) + " -> " + out_dir);
  const auto start = std::chrono::steady_clock::now();
  const opm::BenchResult result = opm::run_benchmark(cfg);
  opm::emit_results(result, out_dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log(LogLevel::kInfo, "done in " + std::to_string(secs) + " s");
  if (log_level() == LogLevel::kDebug) {
    for (const auto& c : result.curves) {
      log(LogLevel::kDebug, c.filter + " lambda=" + std::to_string(c.lambda) + " thr=" + std::to_string(c.threshold) +
                                " avg_err=" + std::to_string(c.time_averaged_error()));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Possibilistic vs probabilistic single-target filtering benchmark"};
  app.footer(defaults_help());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<double> lambdas;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "bench_out";
  std::optional<unsigned> threads;

  auto* run = app.add_subcommand("run", "Run the Monte Carlo sweep described by a config file");
  run->add_option("--config", config_path, "Flat JSON config; missing keys take the defaults")->check(CLI::ExistingFile);
  run->add_option("--lambda", lambdas, "Clutter rates to sweep (overrides lambda_list)");
  run->add_option("--runs", runs, "Monte Carlo runs per clutter rate");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out_dir, "Output directory for curves.csv and summary.csv");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* demo = app.add_subcommand("demo", "Run the pinned small demo configuration");
  demo->add_option("--seed", seed, "Base seed");
  demo->add_option("--out", out_dir, "Output directory for curves.csv and summary.csv");
  demo->add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  opm::BenchConfig cfg;
  try {
    if (*demo) {
      cfg = opm::BenchConfig::demo();
    } else if (!config_path.empty()) {
      cfg = opm::load_bench_config(config_path);
    }
    if (!lambdas.empty()) cfg.lambda_list = lambdas;
    if (runs) cfg.n_runs = *runs;
    if (seed) cfg.base_seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
  } catch (const opm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    return execute(cfg, out_dir);
  } catch (const opm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const opm::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
