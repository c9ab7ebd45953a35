#pragma once

#include "opm/possibility_core.hpp"
#include "opm/single_target_filter.hpp"

#include <optional>
#include <vector>

namespace opm {

/// Probabilistic single-target baseline: integrated probabilistic data
/// association with a Gaussian mixture and a Markov-chain existence model.
///
/// Model pinned for reproducibility:
///  - existence:   r' = p_s r + p_b (1 - r)   (birth is allowed from non-existence every step)
///  - clutter:     Poisson, intensity rho = lambda / |region| uniform over the region
///  - newborns:    uniform position over the region; a newborn is materialized
///                 only when detected, as N(y, R) on observed coordinates and
///                 N(0, birth_unobserved_std^2) on the others
///  - update:      Lambda = 1 - p_d + p_d sum_y [ sum_i b_i N(y; Hm_i, S_i) + b_nb / |region| ] / rho
///                 r+ = Lambda r' / (1 - r' + Lambda r')
///                 misdetection weight b_i (1 - p_d) / Lambda, detection weight
///                 b_i p_d N(y; Hm_i, S_i) / (rho Lambda); an undetected newborn
///                 cannot be represented by a Gaussian and its share is removed
///                 from the existence probability.
///  - reduction:   prune below tau_p, moment-matching merge within tau_m, cap.
/// With lambda = 0 the clutter-free limit is used (every observation is a detection).
struct IpdaParams {
  Matrix F;
  Matrix Q;
  Matrix H;
  Matrix R;
  double p_d = 0.8;
  double p_s = 0.99;
  double p_b = 0.5;
  double clutter_rate = 1.0;
  /// Axis-aligned surveillance region on the observation space.
  Vector region_lo;
  Vector region_hi;
  double birth_unobserved_std = 1.0;
  double tau_p = 1e-5;
  double tau_m = 3.22;
  std::size_t max_components = 200;

  void validate() const;
  [[nodiscard]] double region_volume() const;
  [[nodiscard]] bool in_region(const Vector& y) const;
};

/// Component weights are probabilities; after an update they sum to 1.
/// Between predict and update, newborn_share holds the predicted mass of
/// objects appearing this step, and the component weights sum to 1 - newborn_share.
struct IpdaState {
  double existence = 0.0;
  std::vector<GaussianPossibility> components;
  double newborn_share = 0.0;
  int time_index = 0;
};

[[nodiscard]] IpdaState ipda_predict(const IpdaState& s, const IpdaParams& p);
[[nodiscard]] IpdaState ipda_update(const IpdaState& s, const IpdaParams& p, const ObservationSet& Y);
[[nodiscard]] std::optional<Vector> ipda_estimate(const IpdaState& s, double tau_conf);
[[nodiscard]] IpdaState ipda_step(const IpdaState& s, const IpdaParams& p, const ObservationSet& Y);

/// Moment-preserving merge of a probability mixture: components within tau_m
/// (Mahalanobis, w.r.t. the heavier one) are replaced by their weighted moments.
[[nodiscard]] std::vector<GaussianPossibility> merge_moment_matched(const std::vector<GaussianPossibility>& comps,
                                                                    double tau_m);

}  // namespace opm
