#pragma once

#include "opm/possibility_core.hpp"

#include <cstddef>

namespace opm {

/// Drops components with weight < tau_p. The largest-weight component is
/// always kept so the mixture can still be renormalized. flat_weight is untouched.
[[nodiscard]] MaxMixture prune(const MaxMixture& mix, double tau_p);

/// Removes components that never attain the max of the mixture.
///
/// Component i is removed when it is certified to lie below a single other
/// retained component (or below the flat term) everywhere. The pairwise test
/// compares the two log-quadratics exactly whenever the precision difference
/// P_i - P_j is positive-definite, which covers every dominated pair in one
/// dimension; in higher dimensions a singular difference is only accepted for
/// identical Gaussians, so contributing components are never dropped.
[[nodiscard]] MaxMixture dominance_reduce(const MaxMixture& mix);

/// True when w_i N(.; m_i, V_i) <= w_j N(.; m_j, V_j) is certified over the whole space.
[[nodiscard]] bool dominated_by(const GaussianPossibility& candidate, const GaussianPossibility& other);

struct MergeReport {
  MaxMixture mixture;
  std::size_t merged_pairs = 0;
  /// Largest shortfall  w_j - merged(m_j)  over absorbed components, >= 0.
  double max_peak_deficit = 0.0;
};

/// Greedy peak-preserving merge for max-mixtures.
///
/// Visiting components by decreasing weight, component j is absorbed into the
/// heavier component i when (m_j - m_i)' V_i^-1 (m_j - m_i) <= tau_m^2. The
/// survivor keeps w_i and m_i; its covariance becomes V_i + s * d d' with
/// d = m_j - m_i and s in [0,1] the smallest value for which the survivor
/// reaches w_j at m_j (s = 1 when that is unreachable). Any remaining
/// shortfall at absorbed peaks is reported, not bounded.
[[nodiscard]] MergeReport merge_with_report(const MaxMixture& mix, double tau_m);

[[nodiscard]] MaxMixture merge(const MaxMixture& mix, double tau_m);

/// Keeps at most max_components components, dropping the lowest weights.
[[nodiscard]] MaxMixture cap(const MaxMixture& mix, std::size_t max_components);

/// Removes exact duplicates (same weight, mean and covariance), keeping the first.
[[nodiscard]] MaxMixture remove_duplicates(const MaxMixture& mix);

}  // namespace opm
