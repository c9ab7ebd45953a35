#include "opm/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace opm {

namespace {

using nlohmann::json;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

template <class T>
void read_field(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config field '" + field + "': " + what);
}

constexpr const char* kKnownKeys[] = {
    "dt",     "q_accel",       "r_obs",          "p_detect",       "fp_lo",   "fp_hi",         "t_birth",
    "t_death", "t_end",        "init_vel_std",   "a_df",           "a_omega", "a_alpha",       "tau_p",
    "tau_m",  "p_d",           "p_s",            "p_b",            "tau_p_baseline", "tau_m_baseline",
    "birth_vel_std", "lambda_list", "thresholds", "n_runs",         "base_seed", "c_err",     "threads"};

struct RunOutcome {
  // [filter][threshold][t], filter 0 = proposed, 1 = baseline
  std::vector<double> error;
  std::vector<unsigned char> declared;
};

}  // namespace

void BenchConfig::validate() const {
  try {
    scenario.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  auto unit_open = [](double v) { return v > 0.0 && v <= 1.0; };
  require(unit_open(proposed.a_df), "a_df", "must lie in (0,1]");
  require(unit_open(proposed.a_omega), "a_omega", "must lie in (0,1]");
  require(unit_open(proposed.a_alpha), "a_alpha", "must lie in (0,1]");
  require(proposed.tau_p >= 0.0 && proposed.tau_p < 1.0, "tau_p", "must lie in [0,1)");
  require(proposed.tau_m >= 0.0, "tau_m", "must be non-negative");
  require(baseline.p_d >= 0.0 && baseline.p_d <= 1.0, "p_d", "must lie in [0,1]");
  require(baseline.p_s >= 0.0 && baseline.p_s <= 1.0, "p_s", "must lie in [0,1]");
  require(baseline.p_b >= 0.0 && baseline.p_b <= 1.0, "p_b", "must lie in [0,1]");
  require(baseline.tau_p >= 0.0 && baseline.tau_p < 1.0, "tau_p_baseline", "must lie in [0,1)");
  require(baseline.tau_m >= 0.0, "tau_m_baseline", "must be non-negative");
  require(birth_vel_std > 0.0, "birth_vel_std", "must be positive");
  require(!lambda_list.empty(), "lambda_list", "must not be empty");
  for (double l : lambda_list) require(l >= 0.0, "lambda_list", "values must be non-negative");
  require(!thresholds.empty(), "thresholds", "must not be empty");
  for (double t : thresholds) require(t > 0.0 && t < 1.0, "thresholds", "values must lie in (0,1)");
  require(n_runs >= 1, "n_runs", "must be at least 1");
  require(c_err > 0.0, "c_err", "must be positive");
}

BenchConfig BenchConfig::demo() {
  BenchConfig cfg;
  cfg.n_runs = 20;
  cfg.base_seed = 2018;
  cfg.thresholds = {0.2, 0.5, 0.8};
  return cfg;
}

BenchConfig parse_bench_config(const std::string& json_text, const BenchConfig& defaults) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(std::begin(kKnownKeys), std::end(kKnownKeys),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError("config field '" + item.key() + "': unknown key");
  }
  BenchConfig cfg = defaults;
  auto& sc = cfg.scenario;
  read_field(j, "dt", sc.dt);
  read_field(j, "q_accel", sc.q_accel);
  read_field(j, "r_obs", sc.r_obs);
  read_field(j, "p_detect", sc.p_detect);
  read_field(j, "fp_lo", sc.fp_lo);
  read_field(j, "fp_hi", sc.fp_hi);
  read_field(j, "t_birth", sc.t_birth);
  read_field(j, "t_death", sc.t_death);
  read_field(j, "t_end", sc.t_end);
  read_field(j, "init_vel_std", sc.init_vel_std);
  read_field(j, "a_df", cfg.proposed.a_df);
  read_field(j, "a_omega", cfg.proposed.a_omega);
  read_field(j, "a_alpha", cfg.proposed.a_alpha);
  read_field(j, "tau_p", cfg.proposed.tau_p);
  read_field(j, "tau_m", cfg.proposed.tau_m);
  read_field(j, "p_d", cfg.baseline.p_d);
  read_field(j, "p_s", cfg.baseline.p_s);
  read_field(j, "p_b", cfg.baseline.p_b);
  read_field(j, "tau_p_baseline", cfg.baseline.tau_p);
  read_field(j, "tau_m_baseline", cfg.baseline.tau_m);
  read_field(j, "birth_vel_std", cfg.birth_vel_std);
  read_field(j, "lambda_list", cfg.lambda_list);
  read_field(j, "thresholds", cfg.thresholds);
  read_field(j, "n_runs", cfg.n_runs);
  read_field(j, "base_seed", cfg.base_seed);
  read_field(j, "c_err", cfg.c_err);
  read_field(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path, const BenchConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str(), defaults);
}

SingleTargetParams proposed_params(const BenchConfig& cfg) {
  const auto& sc = cfg.scenario;
  SingleTargetParams p;
  p.F = ncv_transition(sc.dt);
  p.Q = ncv_process_noise(sc.dt, sc.q_accel);
  p.H = position_observation();
  p.R = Matrix::Constant(1, 1, sc.r_obs * sc.r_obs);
  p.a_pi = 1.0;
  p.a_omega = cfg.proposed.a_omega;
  p.a_alpha = cfg.proposed.a_alpha;
  p.a_df = cfg.proposed.a_df;
  p.birth = ObservationDrivenBirth{cfg.birth_vel_std};
  p.clutter = ClutterModel::no_knowledge();
  p.limits.tau_p = cfg.proposed.tau_p;
  p.limits.tau_m = cfg.proposed.tau_m;
  return p;
}

IpdaParams baseline_params(const BenchConfig& cfg, double lambda) {
  const auto& sc = cfg.scenario;
  IpdaParams p;
  p.F = ncv_transition(sc.dt);
  p.Q = ncv_process_noise(sc.dt, sc.q_accel);
  p.H = position_observation();
  p.R = Matrix::Constant(1, 1, sc.r_obs * sc.r_obs);
  p.p_d = cfg.baseline.p_d;
  p.p_s = cfg.baseline.p_s;
  p.p_b = cfg.baseline.p_b;
  p.clutter_rate = lambda;
  p.region_lo = Vector::Constant(1, sc.fp_lo);
  p.region_hi = Vector::Constant(1, sc.fp_hi);
  p.birth_unobserved_std = cfg.birth_vel_std;
  p.tau_p = cfg.baseline.tau_p;
  p.tau_m = cfg.baseline.tau_m;
  return p;
}

double Curve::time_averaged_error() const {
  if (mean_error.empty()) return 0.0;
  double s = 0.0;
  for (double e : mean_error) s += e;
  return s / static_cast<double>(mean_error.size());
}

double Curve::post_death_declared(int t_death) const {
  double s = 0.0;
  for (std::size_t t = static_cast<std::size_t>(t_death) + 1; t < declared_rate.size(); ++t) s += declared_rate[t];
  return s;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const SingleTargetParams proposed = proposed_params(cfg);
  proposed.validate();

  const auto steps = static_cast<std::size_t>(cfg.scenario.t_end + 1);
  const std::size_t n_thr = cfg.thresholds.size();
  const std::size_t per_filter = n_thr * steps;
  const auto n_runs = static_cast<std::size_t>(cfg.n_runs);

  BenchResult result;
  result.n_runs = cfg.n_runs;
  result.base_seed = cfg.base_seed;
  result.t_death = cfg.scenario.t_death;
  result.c_err = cfg.c_err;

  for (std::size_t li = 0; li < cfg.lambda_list.size(); ++li) {
    const double lambda = cfg.lambda_list[li];
    ScenarioConfig sc = cfg.scenario;
    sc.lambda_fp = lambda;
    const IpdaParams baseline = baseline_params(cfg, lambda);
    baseline.validate();

    auto run_one = [&](std::size_t r) {
      const GroundTruth truth = simulate_truth(sc, derive_seed(cfg.base_seed, 0, r));
      const ObservationRecord obs = generate_observations(truth, sc, derive_seed(cfg.base_seed, 1 + li, r));
      RunOutcome out;
      out.error.resize(2 * per_filter);
      out.declared.resize(2 * per_filter);
      auto record = [&](std::size_t filter, std::size_t k, std::size_t t, const std::optional<Vector>& est) {
        const std::size_t idx = filter * per_filter + k * steps + t;
        out.error[idx] = error_at(static_cast<int>(t), est, truth, cfg.c_err);
        out.declared[idx] = est.has_value() ? 1 : 0;
      };
      ExtendedPossibility ps = ExtendedPossibility::absent();
      IpdaState bs;
      for (std::size_t t = 0; t < steps; ++t) {
        ps = step(ps, proposed, obs.scans[t]);
        bs = ipda_step(bs, baseline, obs.scans[t]);
        for (std::size_t k = 0; k < n_thr; ++k) {
          record(0, k, t, estimate(ps, cfg.thresholds[k]));
          record(1, k, t, ipda_estimate(bs, cfg.thresholds[k]));
        }
      }
      return out;
    };

    std::vector<RunOutcome> outcomes(n_runs);
    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_runs));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t r = next++; r < n_runs; r = next++) {
        try {
          outcomes[r] = run_one(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_runs;
        }
      }
    };
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Reduction in run order, so the sums do not depend on scheduling.
    for (std::size_t filter = 0; filter < 2; ++filter) {
      for (std::size_t k = 0; k < n_thr; ++k) {
        Curve c;
        c.filter = filter == 0 ? "proposed" : "baseline";
        c.lambda = lambda;
        c.threshold = cfg.thresholds[k];
        c.mean_error.assign(steps, 0.0);
        c.declared_rate.assign(steps, 0.0);
        for (const auto& o : outcomes) {
          for (std::size_t t = 0; t < steps; ++t) {
            const std::size_t idx = filter * per_filter + k * steps + t;
            c.mean_error[t] += o.error[idx];
            c.declared_rate[t] += o.declared[idx];
          }
        }
        for (std::size_t t = 0; t < steps; ++t) {
          c.mean_error[t] /= static_cast<double>(n_runs);
          c.declared_rate[t] /= static_cast<double>(n_runs);
        }
        result.curves.push_back(std::move(c));
      }
    }
  }
  return result;
}

void write_curves_csv(std::ostream& os, const BenchResult& result) {
  os << "filter,lambda,threshold,t,mean_error,n_runs,seed\n";
  for (const auto& c : result.curves) {
    for (std::size_t t = 0; t < c.mean_error.size(); ++t) {
      os << c.filter << ',' << fmt(c.lambda, "%g") << ',' << fmt(c.threshold, "%g") << ',' << t << ','
         << fmt(c.mean_error[t]) << ',' << result.n_runs << ',' << result.base_seed << '\n';
    }
  }
}

void write_summary_csv(std::ostream& os, const BenchResult& result) {
  os << "filter,lambda,threshold,time_avg_error,post_death_declared,c_err,n_runs,seed\n";
  for (const auto& c : result.curves) {
    os << c.filter << ',' << fmt(c.lambda, "%g") << ',' << fmt(c.threshold, "%g") << ','
       << fmt(c.time_averaged_error()) << ',' << fmt(c.post_death_declared(result.t_death)) << ','
       << fmt(result.c_err, "%g") << ',' << result.n_runs << ',' << result.base_seed << '\n';
  }
}

std::vector<CurveRow> parse_curves_csv(std::istream& is) {
  std::vector<CurveRow> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  if (line != "filter,lambda,threshold,t,mean_error,n_runs,seed") throw InputError("curves CSV: unexpected header");
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw InputError("curves CSV line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      rows.push_back(CurveRow{f[0], std::stod(f[1]), std::stod(f[2]), std::stoi(f[3]), std::stod(f[4]),
                              std::stoi(f[5]), std::stoull(f[6])});
    } catch (const std::exception&) {
      throw InputError("curves CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

void emit_results(const BenchResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
  };
  write(dir / "curves.csv", [&](std::ostream& os) { write_curves_csv(os, result); });
  write(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, result); });
}

}  // namespace opm
