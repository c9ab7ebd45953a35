#pragma once

#include "opm/mixture_reduction.hpp"
#include "opm/possibility_core.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace opm {

/// Observations received at one time step. Detection failure is implicit.
using ObservationSet = std::vector<Vector>;

/// Sorts observations lexicographically and drops exact duplicates.
[[nodiscard]] ObservationSet canonical_observations(const ObservationSet& Y);

/// What is known about false positives.
///
/// The possibility of a clutter set Y is  card(|Y|) * prod_{y in Y} spatial(y).
/// With no knowledge at all both factors are identically 1.
struct ClutterModel {
  enum class Mode { kNoKnowledge, kCardinality };

  Mode mode = Mode::kNoKnowledge;
  std::function<double(std::size_t)> cardinality;
  std::function<double(const Vector&)> spatial;

  static ClutterModel no_knowledge();
  /// card(n) = ratio^n, optionally with spatial information.
  static ClutterModel geometric(double ratio, std::function<double(const Vector&)> spatial = {});
  /// card(n) = table[n], and table.back() for n beyond the table.
  static ClutterModel tabulated(std::vector<double> table, std::function<double(const Vector&)> spatial = {});
};

/// Possibility that the clutter is exactly Y.
[[nodiscard]] double clutter_possibility(const ClutterModel& c, const ObservationSet& Y);

/// Appearance known only through observations: g_alpha(psi, x) = 1 on S. The
/// Gaussian is materialized when an observation arrives; unobserved
/// coordinates get a zero-mean prior with this standard deviation.
struct ObservationDrivenBirth {
  double unobserved_std = 1.0;
};

/// Appearance as an explicit max-mixture g_alpha(psi, .) on S.
struct ExplicitBirth {
  std::vector<GaussianPossibility> components;
};

using BirthModel = std::variant<ObservationDrivenBirth, ExplicitBirth>;

/// Mixture-management thresholds applied after every update.
struct ReductionLimits {
  double tau_p = 1e-4;
  double tau_m = 3.22;
  std::size_t max_components = 200;
};

/// Gaussian possibility on the state space for an object first seen at y.
///
/// H must select coordinates (each row a distinct unit vector). Observed
/// coordinates take y with covariance R; the others are centred on zero with
/// variance unobserved_std^2. This is exactly N(y; Hx, R) times the prior on
/// the unobserved coordinates.
[[nodiscard]] GaussianPossibility observation_driven_component(const Vector& y, const Matrix& H, const Matrix& R,
                                                               double unobserved_std, double weight);

struct SingleTargetParams {
  Matrix F;
  Matrix Q;
  Matrix H;
  Matrix R;
  double a_pi = 1.0;     ///< possibility of staying in S
  double a_omega = 0.01; ///< possibility of leaving S
  double a_alpha = 0.5;  ///< possibility of remaining absent
  double a_df = 0.2;     ///< possibility of a detection failure
  BirthModel birth = ObservationDrivenBirth{};
  ClutterModel clutter = ClutterModel::no_knowledge();
  ReductionLimits limits;

  /// Throws InputError on inconsistent dimensions or out-of-range constants.
  void validate() const;
};

/// Knowledge about one system on S u {psi}: a max-mixture on S and the
/// possibility that the system is absent.
struct ExtendedPossibility {
  double psi_mass = 1.0;
  MaxMixture on_s;
  int time_index = 0;

  /// Nothing is known: the system is fully possibly absent, nothing on S.
  static ExtendedPossibility absent();
};

[[nodiscard]] ExtendedPossibility predict(const ExtendedPossibility& state, const SingleTargetParams& p);

/// Data assimilation with detection failures and false positives. The result
/// is renormalized so that max(psi_mass, sup(on_s)) == 1 exactly.
[[nodiscard]] ExtendedPossibility update(const ExtendedPossibility& state, const SingleTargetParams& p,
                                         const ObservationSet& Y);

/// Declares the mean of the heaviest component when it beats the absence
/// possibility and leads the runner-up (the next component or the flat term)
/// by more than tau_c.
[[nodiscard]] std::optional<Vector> estimate(const ExtendedPossibility& state, double tau_c);

/// predict, update, then prune -> dominance_reduce -> merge -> cap.
[[nodiscard]] ExtendedPossibility step(const ExtendedPossibility& state, const SingleTargetParams& p,
                                       const ObservationSet& Y);

/// prune -> dominance_reduce -> merge -> cap on the restriction to S.
[[nodiscard]] MaxMixture reduce(const MaxMixture& mix, const ReductionLimits& limits);

}  // namespace opm
