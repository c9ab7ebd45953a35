#pragma once

#include "opm/single_target_filter.hpp"

#include <optional>
#include <vector>

namespace opm {

/// Intensity function of a single-possibility uncertain counting measure:
/// F(x) = max(floor, max_i w_i N(x; m_i, V_i)), the possibility that at least
/// one object sits at x. Always bounded by 1.
struct IntensityMixture {
  double floor = 0.0;
  std::vector<GaussianPossibility> components;

  [[nodiscard]] MaxMixture as_mixture() const { return MaxMixture{components, floor}; }
  [[nodiscard]] static IntensityMixture from_mixture(MaxMixture mix) {
    return IntensityMixture{mix.flat_weight, std::move(mix.components)};
  }
};

[[nodiscard]] double eval(const IntensityMixture& F, const Vector& x);
[[nodiscard]] double sup(const IntensityMixture& F);

/// False-positive intensity on the observation space: a constant, or a
/// max-mixture when spatial information is available.
struct ClutterIntensity {
  double constant = 1.0;
  std::optional<MaxMixture> spatial;

  [[nodiscard]] double operator()(const Vector& y) const;
};

struct MultiTargetParams {
  Matrix F;
  Matrix Q;
  Matrix H;
  Matrix R;
  double a_pi = 1.0;
  IntensityMixture birth{0.5, {}};
  double a_df = 0.2;
  ClutterIntensity clutter;
  /// Prior standard deviation of unobserved coordinates for floor-born components.
  double birth_unobserved_std = 1.0;
  ReductionLimits limits;
  double tau_x = 0.9;

  void validate() const;
};

/// Intensity of the superposition of two independent counting measures: pointwise max.
[[nodiscard]] IntensityMixture sum_intensities(const IntensityMixture& a, const IntensityMixture& b);

/// Predicted intensity: the sup-convolution of F with a_pi N(.; Fx', Q),
/// superposed with the birth intensity.
[[nodiscard]] IntensityMixture propagate_intensity(const IntensityMixture& Fm, const MultiTargetParams& p);

/// Updated intensity given one scan.
///
///   F_t(x) = a_df Fp(x)  v  max_y  Fp(x) h(y|x) / ( sup_x' Fp(x') h(y|x')  v  clutter(y) )
///
/// Each observation is a point of the realisation; repeating an observation
/// yields exactly the same components, which are then collapsed.
[[nodiscard]] IntensityMixture update_intensity(const IntensityMixture& Fp, const MultiTargetParams& p,
                                                const ObservationSet& Y);

/// Cardinality c(n) = sup(F)^n and spatial information f = F / sup(F).
struct CardinalitySpatial {
  double sup_value = 0.0;
  IntensityMixture spatial;

  [[nodiscard]] double cardinality(std::size_t n) const;
};

[[nodiscard]] CardinalitySpatial recover_cardinality_spatial(const IntensityMixture& Fm);

/// Means of components heavier than both tau_x and the floor, at most one per
/// cluster of radius tau_m (Mahalanobis, w.r.t. the heavier component).
[[nodiscard]] std::vector<Vector> extract_targets(const IntensityMixture& Fm, double tau_x, double tau_m = 3.22);

/// propagate -> update -> reduce.
[[nodiscard]] IntensityMixture intensity_step(const IntensityMixture& Fm, const MultiTargetParams& p,
                                              const ObservationSet& Y);

}  // namespace opm
