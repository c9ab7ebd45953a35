#include "opm/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace opm {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError("scenario line " + std::to_string(line_no) + ": bad number '" + token + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (!(q_accel >= 0.0)) throw InputError("q_accel must be non-negative");
  if (!(r_obs > 0.0)) throw InputError("r_obs must be positive");
  if (!(init_vel_std >= 0.0)) throw InputError("init_vel_std must be non-negative");
  if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw InputError("p_detect must lie in [0,1]");
  if (!(lambda_fp >= 0.0)) throw InputError("lambda_fp must be non-negative");
  if (!(fp_hi > fp_lo)) throw InputError("fp region must be non-empty (fp_lo < fp_hi)");
  if (!(0 <= t_birth && t_birth <= t_death && t_death <= t_end)) {
    throw InputError("time indices must satisfy 0 <= t_birth <= t_death <= t_end");
  }
}

Matrix ncv_transition(double dt) {
  Matrix F(2, 2);
  F << 1.0, dt, 0.0, 1.0;
  return F;
}

Vector ncv_noise_gain(double dt) {
  Vector G(2);
  G << 0.5 * dt * dt, dt;
  return G;
}

Matrix ncv_process_noise(double dt, double q) {
  const Vector G = ncv_noise_gain(dt);
  return q * q * G * G.transpose();
}

Matrix position_observation() {
  Matrix H(1, 2);
  H << 1.0, 0.0;
  return H;
}

bool GroundTruth::present(int t) const {
  return t >= 0 && t < steps() && states[static_cast<std::size_t>(t)].has_value();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

GroundTruth simulate_truth(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  const Matrix F = ncv_transition(cfg.dt);
  const Vector G = ncv_noise_gain(cfg.dt);

  GroundTruth truth;
  truth.states.resize(static_cast<std::size_t>(cfg.t_end + 1));
  Vector x(2);
  x << 0.0, cfg.init_vel_std * standard(rng);
  for (int t = cfg.t_birth; t <= cfg.t_death; ++t) {
    truth.states[static_cast<std::size_t>(t)] = x;
    x = F * x + G * (cfg.q_accel * standard(rng));
  }
  return truth;
}

ObservationRecord generate_observations(const GroundTruth& truth, const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> region(cfg.fp_lo, cfg.fp_hi);

  ObservationRecord rec;
  rec.scans.resize(truth.states.size());
  for (std::size_t t = 0; t < truth.states.size(); ++t) {
    auto& scan = rec.scans[t];
    if (truth.states[t] && unit(rng) < cfg.p_detect) {
      scan.push_back(Vector::Constant(1, (*truth.states[t])(0) + cfg.r_obs * standard(rng)));
    }
    if (cfg.lambda_fp > 0.0) {
      std::poisson_distribution<int> count(cfg.lambda_fp);
      const int n = count(rng);
      for (int k = 0; k < n; ++k) scan.push_back(Vector::Constant(1, region(rng)));
    }
    std::shuffle(scan.begin(), scan.end(), rng);
  }
  return rec;
}

double error_at(int t, const std::optional<Vector>& estimate, const GroundTruth& truth, double c_err) {
  const bool declared = estimate.has_value();
  if (!truth.present(t)) return declared ? c_err : 0.0;
  if (!declared) return c_err;
  const double d = std::abs((*estimate)(0) - (*truth.states[static_cast<std::size_t>(t)])(0));
  return std::min(d, c_err);
}

void write_scenario(std::ostream& os, const GroundTruth& truth, const ObservationRecord& record) {
  if (record.scans.size() != truth.states.size()) throw InputError("write_scenario: truth and record lengths differ");
  for (std::size_t t = 0; t < truth.states.size(); ++t) {
    os << t << '\t';
    if (const auto& s = truth.states[t]) {
      for (Eigen::Index i = 0; i < s->size(); ++i) os << (i ? " " : "") << format_double((*s)(i));
    } else {
      os << '-';
    }
    os << '\t';
    const auto& scan = record.scans[t];
    for (std::size_t k = 0; k < scan.size(); ++k) os << (k ? " " : "") << format_double(scan[k](0));
    os << '\n';
  }
}

ScenarioRecord read_scenario(std::istream& is) {
  ScenarioRecord out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) throw InputError("scenario line " + std::to_string(line_no) + ": expected 3 fields");
    const auto t = static_cast<std::size_t>(parse_double(fields[0], line_no));
    if (t != out.truth.states.size()) {
      throw InputError("scenario line " + std::to_string(line_no) + ": steps must be consecutive from 0");
    }
    if (fields[1] == "-") {
      out.truth.states.emplace_back();
    } else {
      const auto parts = split(fields[1], ' ');
      Vector s(static_cast<Eigen::Index>(parts.size()));
      for (std::size_t i = 0; i < parts.size(); ++i) s(static_cast<Eigen::Index>(i)) = parse_double(parts[i], line_no);
      out.truth.states.emplace_back(std::move(s));
    }
    ObservationSet scan;
    if (!fields[2].empty()) {
      for (const auto& tok : split(fields[2], ' ')) scan.push_back(Vector::Constant(1, parse_double(tok, line_no)));
    }
    out.record.scans.push_back(std::move(scan));
  }
  return out;
}

}  // namespace opm
