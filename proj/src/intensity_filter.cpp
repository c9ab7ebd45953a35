#include "opm/intensity_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace opm {

double eval(const IntensityMixture& F, const Vector& x) { return eval(F.as_mixture(), x); }

double sup(const IntensityMixture& F) {
  double value = F.floor;
  for (const auto& c : F.components) value = std::max(value, c.weight);
  return value;
}

double ClutterIntensity::operator()(const Vector& y) const { return spatial ? eval(*spatial, y) : constant; }

void MultiTargetParams::validate() const {
  const auto n = F.rows();
  if (n == 0 || F.cols() != n) throw InputError("F must be a non-empty square matrix");
  if (Q.rows() != n || Q.cols() != n) throw InputError("Q must match the state dimension");
  if (H.cols() != n || H.rows() == 0) throw InputError("H must have one column per state coordinate");
  if (R.rows() != H.rows() || R.cols() != H.rows()) throw InputError("R must match the observation dimension");
  require_psd(Q, "Q");
  require_psd(R, "R");
  if (!(a_pi > 0.0 && a_pi <= 1.0)) throw InputError("a_pi must lie in (0,1]");
  if (!(a_df > 0.0 && a_df <= 1.0)) throw InputError("a_df must lie in (0,1]");
  if (!(birth.floor >= 0.0 && birth.floor <= 1.0)) throw InputError("birth floor must lie in [0,1]");
  for (const auto& c : birth.components) opm::validate(c);
  if (!clutter.spatial && !(clutter.constant > 0.0 && clutter.constant <= 1.0)) {
    throw InputError("constant clutter intensity must lie in (0,1]");
  }
  if (!(birth_unobserved_std > 0.0)) throw InputError("birth_unobserved_std must be positive");
  if (!(tau_x > 0.0 && tau_x <= 1.0)) throw InputError("tau_x must lie in (0,1]");
  if (birth.floor > 0.0) (void)observation_driven_component(Vector::Zero(H.rows()), H, R, birth_unobserved_std, 1.0);
}

IntensityMixture sum_intensities(const IntensityMixture& a, const IntensityMixture& b) {
  MaxMixture mix;
  mix.flat_weight = std::max(a.floor, b.floor);
  mix.components.reserve(a.components.size() + b.components.size());
  mix.components.insert(mix.components.end(), a.components.begin(), a.components.end());
  mix.components.insert(mix.components.end(), b.components.begin(), b.components.end());
  return IntensityMixture::from_mixture(dominance_reduce(mix));
}

IntensityMixture propagate_intensity(const IntensityMixture& Fm, const MultiTargetParams& p) {
  IntensityMixture propagated;
  propagated.floor = p.a_pi * Fm.floor;
  propagated.components.reserve(Fm.components.size());
  for (const auto& c : Fm.components) propagated.components.push_back(detail::predict_unchecked(c, p.F, p.Q, p.a_pi));
  return sum_intensities(propagated, p.birth);
}

IntensityMixture update_intensity(const IntensityMixture& Fp, const MultiTargetParams& p, const ObservationSet& Y) {
  MaxMixture out;
  out.flat_weight = p.a_df * Fp.floor;
  out.components.reserve(Fp.components.size() * (Y.size() + 1) + Y.size());
  for (const auto& c : Fp.components) out.components.push_back({p.a_df * c.weight, c.mean, c.cov});

  std::vector<KalmanUpdater> updaters;
  updaters.reserve(Fp.components.size());
  for (const auto& c : Fp.components) updaters.emplace_back(c, p.H, p.R);

  std::vector<double> peaks(Fp.components.size());
  for (const auto& y : Y) {
    // sup_x Fp(x) h(y|x): each Gaussian contributes w_i N(y; H m_i, S_i), the floor contributes itself.
    double denominator = std::max(Fp.floor, p.clutter(y));
    for (std::size_t i = 0; i < updaters.size(); ++i) {
      peaks[i] = Fp.components[i].weight * updaters[i].likelihood(y);
      denominator = std::max(denominator, peaks[i]);
    }
    if (!(denominator > 0.0)) continue;
    for (std::size_t i = 0; i < updaters.size(); ++i) {
      auto upd = updaters[i].apply(y);
      upd.posterior.weight = peaks[i] / denominator;
      if (upd.posterior.weight > 0.0) out.components.push_back(std::move(upd.posterior));
    }
    if (Fp.floor > 0.0) {
      out.components.push_back(
          observation_driven_component(y, p.H, p.R, p.birth_unobserved_std, Fp.floor / denominator));
    }
  }
  std::erase_if(out.components, [](const auto& c) { return !(c.weight > 0.0); });
  return IntensityMixture::from_mixture(remove_duplicates(out));
}

double CardinalitySpatial::cardinality(std::size_t n) const { return std::pow(sup_value, static_cast<double>(n)); }

CardinalitySpatial recover_cardinality_spatial(const IntensityMixture& Fm) {
  CardinalitySpatial out;
  out.sup_value = sup(Fm);
  if (!(out.sup_value > 0.0)) {
    out.spatial.floor = 1.0;
    return out;
  }
  out.spatial.floor = Fm.floor / out.sup_value;
  out.spatial.components = Fm.components;
  for (auto& c : out.spatial.components) c.weight /= out.sup_value;
  return out;
}

std::vector<Vector> extract_targets(const IntensityMixture& Fm, double tau_x, double tau_m) {
  const MaxMixture reduced = dominance_reduce(Fm.as_mixture());
  std::vector<const GaussianPossibility*> candidates;
  for (const auto& c : reduced.components) {
    if (c.weight > tau_x && c.weight > reduced.flat_weight) candidates.push_back(&c);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto* a, const auto* b) { return a->weight > b->weight; });
  std::vector<const GaussianPossibility*> accepted;
  for (const auto* c : candidates) {
    const bool clustered = std::any_of(accepted.begin(), accepted.end(), [&](const auto* a) {
      return mahalanobis_squared(c->mean, a->mean, a->cov) <= tau_m * tau_m;
    });
    if (!clustered) accepted.push_back(c);
  }
  std::vector<Vector> targets;
  targets.reserve(accepted.size());
  for (const auto* a : accepted) targets.push_back(a->mean);
  return targets;
}

IntensityMixture intensity_step(const IntensityMixture& Fm, const MultiTargetParams& p, const ObservationSet& Y) {
  const IntensityMixture updated = update_intensity(propagate_intensity(Fm, p), p, Y);
  return IntensityMixture::from_mixture(reduce(updated.as_mixture(), p.limits));
}

}  // namespace opm
