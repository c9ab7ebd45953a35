#include "opm/ipda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace opm {

namespace {

double normalize(std::vector<GaussianPossibility>& comps) {
  const double total =
      std::accumulate(comps.begin(), comps.end(), 0.0, [](double acc, const auto& c) { return acc + c.weight; });
  if (total > 0.0) {
    for (auto& c : comps) c.weight /= total;
  }
  return total;
}

}  // namespace

void IpdaParams::validate() const {
  const auto n = F.rows();
  if (n == 0 || F.cols() != n) throw InputError("F must be a non-empty square matrix");
  if (Q.rows() != n || Q.cols() != n) throw InputError("Q must match the state dimension");
  if (H.cols() != n || H.rows() == 0) throw InputError("H must have one column per state coordinate");
  if (R.rows() != H.rows() || R.cols() != H.rows()) throw InputError("R must match the observation dimension");
  require_psd(Q, "Q");
  require_psd(R, "R");
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0,1]");
  };
  prob(p_d, "p_d");
  prob(p_s, "p_s");
  prob(p_b, "p_b");
  if (!(clutter_rate >= 0.0)) throw InputError("clutter_rate must be non-negative");
  if (region_lo.size() != H.rows() || region_hi.size() != H.rows()) {
    throw InputError("surveillance region must match the observation dimension");
  }
  if (!(region_hi.array() > region_lo.array()).all()) throw InputError("surveillance region must be non-empty");
  if (!(tau_p >= 0.0 && tau_p < 1.0)) throw InputError("tau_p must lie in [0,1)");
  if (!(tau_m >= 0.0)) throw InputError("tau_m must be non-negative");
  if (max_components == 0) throw InputError("max_components must be positive");
  (void)observation_driven_component(Vector::Zero(H.rows()), H, R, birth_unobserved_std, 1.0);
}

double IpdaParams::region_volume() const { return (region_hi - region_lo).prod(); }

bool IpdaParams::in_region(const Vector& y) const {
  return (y.array() >= region_lo.array()).all() && (y.array() <= region_hi.array()).all();
}

IpdaState ipda_predict(const IpdaState& s, const IpdaParams& p) {
  IpdaState out;
  out.time_index = s.time_index + 1;
  const double survive = p.p_s * s.existence;
  const double born = p.p_b * (1.0 - s.existence);
  out.existence = std::clamp(survive + born, 0.0, 1.0);
  if (!(out.existence > 0.0)) return out;
  const double survivor_share = survive / out.existence;
  out.newborn_share = born / out.existence;
  if (survivor_share > 0.0) {
    out.components.reserve(s.components.size());
    for (const auto& c : s.components) {
      auto predicted = detail::predict_unchecked(c, p.F, p.Q, 1.0);
      predicted.weight = c.weight * survivor_share;
      out.components.push_back(std::move(predicted));
    }
  }
  return out;
}

IpdaState ipda_update(const IpdaState& s, const IpdaParams& p, const ObservationSet& Y) {
  const ObservationSet obs = canonical_observations(Y);
  const double volume = p.region_volume();
  const double rho = p.clutter_rate / volume;
  const double two_pi = 2.0 * std::numbers::pi;

  IpdaState out;
  out.time_index = s.time_index;

  // Association terms: density of y under each predicted component (and under a newborn).
  struct Detection {
    GaussianPossibility posterior;
    double density;  // b_i * N(y; H m_i, S_i)
  };
  std::vector<Detection> detections;
  detections.reserve(s.components.size() * obs.size() + obs.size());
  double detection_mass = 0.0;
  for (const auto& c : s.components) {
    if (obs.empty()) break;
    const KalmanUpdater updater(c, p.H, p.R);
    const double norm = 1.0 / std::sqrt((two_pi * updater.innovation_cov()).determinant());
    for (const auto& y : obs) {
      auto upd = updater.apply(y);
      const double density = c.weight * norm * upd.likelihood;
      detection_mass += density;
      detections.push_back({std::move(upd.posterior), density});
    }
  }
  if (s.newborn_share > 0.0) {
    for (const auto& y : obs) {
      if (!p.in_region(y)) continue;
      const double density = s.newborn_share / volume;
      detection_mass += density;
      detections.push_back({observation_driven_component(y, p.H, p.R, p.birth_unobserved_std, 1.0), density});
    }
  }

  const double r = s.existence;
  const double newborn_missed = s.newborn_share * (1.0 - p.p_d);
  if (rho > 0.0 || detections.empty()) {
    const double ratio = rho > 0.0 ? p.p_d * detection_mass / rho : 0.0;
    const double lambda = 1.0 - p.p_d + ratio;
    const double denom = 1.0 - r + lambda * r;
    double existence = denom > 0.0 ? lambda * r / denom : 0.0;
    if (lambda > 0.0) {
      for (const auto& c : s.components) {
        out.components.push_back({c.weight * (1.0 - p.p_d) / lambda, c.mean, c.cov});
      }
      for (auto& d : detections) {
        d.posterior.weight = p.p_d * d.density / (rho * lambda);
        out.components.push_back(std::move(d.posterior));
      }
    }
    // Undetected newborns leave the mixture together with their existence mass.
    const double kept = lambda > 0.0 ? std::max(0.0, 1.0 - newborn_missed / lambda) : 0.0;
    existence *= kept;
    out.existence = std::clamp(existence, 0.0, 1.0);
  } else {
    // No clutter: every observation originates from the object, which therefore exists.
    out.existence = 1.0;
    for (auto& d : detections) {
      d.posterior.weight = d.density;
      out.components.push_back(std::move(d.posterior));
    }
  }

  std::erase_if(out.components, [](const auto& c) { return !(c.weight > 0.0); });
  if (normalize(out.components) <= 0.0) {
    out.components.clear();
    out.existence = 0.0;
  }
  return out;
}

std::vector<GaussianPossibility> merge_moment_matched(const std::vector<GaussianPossibility>& comps, double tau_m) {
  const std::size_t n = comps.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return comps[a].weight > comps[b].weight; });
  std::vector<bool> absorbed(n, false);
  std::vector<GaussianPossibility> out;
  const double gate = tau_m * tau_m;
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    if (absorbed[i]) continue;
    Eigen::LLT<Matrix> llt(comps[i].cov);
    if (llt.info() != Eigen::Success) throw NumericalError("merge: covariance is not positive-definite");
    std::vector<std::size_t> group{i};
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      const std::size_t j = order[oj];
      if (absorbed[j]) continue;
      if (llt.matrixL().solve(comps[j].mean - comps[i].mean).squaredNorm() <= gate) {
        absorbed[j] = true;
        group.push_back(j);
      }
    }
    if (group.size() == 1) {
      out.push_back(comps[i]);
      continue;
    }
    double w = 0.0;
    Vector mean = Vector::Zero(comps[i].mean.size());
    for (auto k : group) {
      w += comps[k].weight;
      mean += comps[k].weight * comps[k].mean;
    }
    mean /= w;
    Matrix cov = Matrix::Zero(comps[i].cov.rows(), comps[i].cov.cols());
    for (auto k : group) {
      const Vector d = comps[k].mean - mean;
      cov += comps[k].weight * (comps[k].cov + d * d.transpose());
    }
    cov /= w;
    out.push_back({w, std::move(mean), std::move(cov)});
  }
  return out;
}

IpdaState ipda_step(const IpdaState& s, const IpdaParams& p, const ObservationSet& Y) {
  IpdaState out = ipda_update(ipda_predict(s, p), p, Y);
  std::erase_if(out.components, [&](const auto& c) { return c.weight < p.tau_p; });
  out.components = merge_moment_matched(out.components, p.tau_m);
  if (out.components.size() > p.max_components) {
    std::stable_sort(out.components.begin(), out.components.end(),
                     [](const auto& a, const auto& b) { return a.weight > b.weight; });
    out.components.resize(p.max_components);
  }
  if (normalize(out.components) <= 0.0) {
    out.components.clear();
    out.existence = 0.0;
  }
  return out;
}

std::optional<Vector> ipda_estimate(const IpdaState& s, double tau_conf) {
  if (s.components.empty() || !(s.existence > tau_conf)) return std::nullopt;
  const auto best = std::max_element(s.components.begin(), s.components.end(),
                                     [](const auto& a, const auto& b) { return a.weight < b.weight; });
  return best->mean;
}

}  // namespace opm
