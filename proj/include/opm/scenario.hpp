#pragma once

#include "opm/possibility_core.hpp"
#include "opm/single_target_filter.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace opm {

/// One object on a line, nearly-constant-velocity motion, position observed
/// with noise, detection failures and Poisson clutter.
struct ScenarioConfig {
  double dt = 0.1;           ///< s
  double q_accel = 1.5;      ///< m/s^2, std of the acceleration noise
  double r_obs = 0.25;       ///< m, std of the position observation noise
  double p_detect = 0.8;
  double lambda_fp = 1.0;    ///< mean number of false positives per step
  double fp_lo = -10.0;      ///< m
  double fp_hi = 10.0;       ///< m
  int t_birth = 3;
  int t_death = 22;
  int t_end = 25;
  double init_vel_std = 0.1; ///< m/s
  std::uint64_t seed = 0;

  void validate() const;
};

/// F = [[1, dt], [0, 1]].
[[nodiscard]] Matrix ncv_transition(double dt);
/// Noise gain G = [dt^2 / 2, dt]'.
[[nodiscard]] Vector ncv_noise_gain(double dt);
/// Q = q^2 G G'.
[[nodiscard]] Matrix ncv_process_noise(double dt, double q);
/// H = [1, 0].
[[nodiscard]] Matrix position_observation();

struct GroundTruth {
  /// State [position, velocity] for t = 0..t_end, empty while absent.
  std::vector<std::optional<Vector>> states;

  [[nodiscard]] bool present(int t) const;
  [[nodiscard]] int steps() const { return static_cast<int>(states.size()); }
};

struct ObservationRecord {
  std::vector<ObservationSet> scans;
};

[[nodiscard]] GroundTruth simulate_truth(const ScenarioConfig& cfg, std::uint64_t seed);
[[nodiscard]] ObservationRecord generate_observations(const GroundTruth& truth, const ScenarioConfig& cfg,
                                                      std::uint64_t seed);

/// SplitMix64 finalizer applied to (seed, stream, index); independent sub-seeds
/// for parallel runs without shared generator state.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// e_t: truncated position error plus c_err for a miss while present,
/// c_err for a declaration while absent.
[[nodiscard]] double error_at(int t, const std::optional<Vector>& estimate, const GroundTruth& truth, double c_err);

/// Line-oriented text record, one line per step:
///   <t>\t<position> <velocity>|-\t<y1> <y2> ...
/// Values use 17 significant digits so reading back is exact.
void write_scenario(std::ostream& os, const GroundTruth& truth, const ObservationRecord& record);

struct ScenarioRecord {
  GroundTruth truth;
  ObservationRecord record;
};

/// Throws InputError on malformed lines.
[[nodiscard]] ScenarioRecord read_scenario(std::istream& is);

}  // namespace opm
