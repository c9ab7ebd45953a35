#include "opm/single_target_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace opm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool lexicographic_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

double spatial_value(const ClutterModel& c, const Vector& y) { return c.spatial ? c.spatial(y) : 1.0; }

double cardinality_value(const ClutterModel& c, std::size_t n) { return c.cardinality ? c.cardinality(n) : 1.0; }

/// f_clutter(Y \ {y_k}) for every k, in the order of Y.
std::vector<double> clutter_without_each(const ClutterModel& c, const ObservationSet& Y) {
  const std::size_t n = Y.size();
  if (c.mode == ClutterModel::Mode::kNoKnowledge || n == 0) return std::vector<double>(n, 1.0);
  std::vector<double> spatial(n);
  for (std::size_t k = 0; k < n; ++k) spatial[k] = spatial_value(c, Y[k]);
  std::vector<double> prefix(n + 1, 1.0);
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * spatial[k];
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * spatial[k];
  const double card = cardinality_value(c, n - 1);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = card * prefix[k] * suffix[k + 1];
  return out;
}

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in (0,1], got " + std::to_string(v));
}

void push_if_positive(MaxMixture& mix, GaussianPossibility g) {
  if (g.weight > 0.0) mix.components.push_back(std::move(g));
}

}  // namespace

ObservationSet canonical_observations(const ObservationSet& Y) {
  ObservationSet out = Y;
  std::stable_sort(out.begin(), out.end(), lexicographic_less);
  out.erase(std::unique(out.begin(), out.end(), [](const Vector& a, const Vector& b) { return a == b; }), out.end());
  return out;
}

ClutterModel ClutterModel::no_knowledge() { return ClutterModel{}; }

ClutterModel ClutterModel::geometric(double ratio, std::function<double(const Vector&)> spatial) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InputError("geometric clutter ratio must lie in [0,1]");
  ClutterModel c;
  c.mode = Mode::kCardinality;
  c.cardinality = [ratio](std::size_t n) { return std::pow(ratio, static_cast<double>(n)); };
  c.spatial = std::move(spatial);
  return c;
}

ClutterModel ClutterModel::tabulated(std::vector<double> table, std::function<double(const Vector&)> spatial) {
  if (table.empty()) throw InputError("clutter cardinality table is empty");
  for (double v : table) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("clutter cardinality values must lie in [0,1]");
  }
  ClutterModel c;
  c.mode = Mode::kCardinality;
  c.cardinality = [t = std::move(table)](std::size_t n) { return n < t.size() ? t[n] : t.back(); };
  c.spatial = std::move(spatial);
  return c;
}

double clutter_possibility(const ClutterModel& c, const ObservationSet& Y) {
  if (c.mode == ClutterModel::Mode::kNoKnowledge) return 1.0;
  double value = cardinality_value(c, Y.size());
  for (const auto& y : Y) value *= spatial_value(c, y);
  return value;
}

GaussianPossibility observation_driven_component(const Vector& y, const Matrix& H, const Matrix& R,
                                                 double unobserved_std, double weight) {
  const auto n = H.cols();
  const auto k = H.rows();
  if (y.size() != k || R.rows() != k || R.cols() != k) throw InputError("observation-driven birth: dimension mismatch");
  std::vector<Eigen::Index> selected(static_cast<std::size_t>(k));
  std::vector<bool> observed(static_cast<std::size_t>(n), false);
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index col = -1;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (H(r, c) == 1.0 && col < 0) {
        col = c;
      } else if (H(r, c) != 0.0) {
        col = -2;
        break;
      }
    }
    if (col < 0 || observed[static_cast<std::size_t>(col)]) {
      throw InputError("observation-driven birth requires H to select distinct state coordinates");
    }
    observed[static_cast<std::size_t>(col)] = true;
    selected[static_cast<std::size_t>(r)] = col;
  }
  GaussianPossibility g{weight, Vector::Zero(n), Matrix::Zero(n, n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    if (!observed[static_cast<std::size_t>(c)]) g.cov(c, c) = unobserved_std * unobserved_std;
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto sr = selected[static_cast<std::size_t>(r)];
    g.mean(sr) = y(r);
    for (Eigen::Index s = 0; s < k; ++s) g.cov(sr, selected[static_cast<std::size_t>(s)]) = R(r, s);
  }
  return g;
}

void SingleTargetParams::validate() const {
  const auto n = F.rows();
  if (n == 0 || F.cols() != n) throw InputError("F must be a non-empty square matrix");
  if (Q.rows() != n || Q.cols() != n) throw InputError("Q must match the state dimension");
  if (H.cols() != n || H.rows() == 0) throw InputError("H must have one column per state coordinate");
  if (R.rows() != H.rows() || R.cols() != H.rows()) throw InputError("R must match the observation dimension");
  require_psd(Q, "Q");
  require_psd(R, "R");
  check_unit(a_pi, "a_pi");
  check_unit(a_omega, "a_omega");
  check_unit(a_alpha, "a_alpha");
  check_unit(a_df, "a_df");
  if (std::max(a_pi, a_omega) != 1.0) throw InputError("max(a_pi, a_omega) must equal 1");
  if (!(limits.tau_p >= 0.0 && limits.tau_p < 1.0)) throw InputError("tau_p must lie in [0,1)");
  if (!(limits.tau_m >= 0.0)) throw InputError("tau_m must be non-negative");
  if (limits.max_components == 0) throw InputError("max_components must be positive");
  std::visit(Overloaded{[&](const ObservationDrivenBirth& b) {
                          if (!(b.unobserved_std > 0.0)) throw InputError("birth unobserved_std must be positive");
                          (void)observation_driven_component(Vector::Zero(H.rows()), H, R, b.unobserved_std, 1.0);
                        },
                        [&](const ExplicitBirth& b) {
                          for (const auto& c : b.components) {
                            if (c.mean.size() != n) throw InputError("birth component has wrong dimension");
                            opm::validate(c);
                          }
                        }},
             birth);
}

ExtendedPossibility ExtendedPossibility::absent() { return ExtendedPossibility{}; }

ExtendedPossibility predict(const ExtendedPossibility& state, const SingleTargetParams& p) {
  ExtendedPossibility out;
  out.time_index = state.time_index + 1;
  out.on_s.components.reserve(state.on_s.components.size());
  for (const auto& c : state.on_s.components) {
    out.on_s.components.push_back(detail::predict_unchecked(c, p.F, p.Q, p.a_pi));
  }
  // A constant is invariant under sup-convolution with a_pi N(.; Fx', Q).
  out.on_s.flat_weight = p.a_pi * state.on_s.flat_weight;

  std::visit(Overloaded{[&](const ObservationDrivenBirth&) {
                          out.on_s.flat_weight = std::max(out.on_s.flat_weight, state.psi_mass);
                        },
                        [&](const ExplicitBirth& b) {
                          for (const auto& c : b.components) {
                            push_if_positive(out.on_s, GaussianPossibility{state.psi_mass * c.weight, c.mean, c.cov});
                          }
                        }},
             p.birth);

  out.psi_mass = std::max(p.a_alpha * state.psi_mass, p.a_omega * sup(state.on_s));
  return out;
}

ExtendedPossibility update(const ExtendedPossibility& state, const SingleTargetParams& p, const ObservationSet& Y) {
  const ObservationSet obs = canonical_observations(Y);
  const double clutter_all = clutter_possibility(p.clutter, obs);
  const std::vector<double> clutter_others = clutter_without_each(p.clutter, obs);

  ExtendedPossibility out;
  out.time_index = state.time_index;
  out.psi_mass = state.psi_mass * clutter_all;
  auto& comps = out.on_s.components;
  comps.reserve(state.on_s.components.size() * (obs.size() + 1) + obs.size());

  for (const auto& c : state.on_s.components) {
    push_if_positive(out.on_s, GaussianPossibility{c.weight * p.a_df * clutter_all, c.mean, c.cov});
    if (obs.empty()) continue;
    const KalmanUpdater updater(c, p.H, p.R);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      auto upd = updater.apply(obs[k]);
      upd.posterior.weight = c.weight * clutter_others[k] * upd.likelihood;
      push_if_positive(out.on_s, std::move(upd.posterior));
    }
  }

  const double flat = state.on_s.flat_weight;
  out.on_s.flat_weight = flat * p.a_df * clutter_all;
  if (flat > 0.0) {
    const double unobserved_std =
        std::holds_alternative<ObservationDrivenBirth>(p.birth) ? std::get<ObservationDrivenBirth>(p.birth).unobserved_std
                                                                : 1.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
      push_if_positive(out.on_s,
                       observation_driven_component(obs[k], p.H, p.R, unobserved_std, flat * clutter_others[k]));
    }
  }

  const double normalizer = std::max(out.psi_mass, sup(out.on_s));
  if (!(normalizer > 0.0)) {
    throw NumericalError("update: every hypothesis has zero possibility (normalizing constant is 0)");
  }
  out.psi_mass /= normalizer;
  out.on_s.flat_weight /= normalizer;
  for (auto& c : comps) c.weight /= normalizer;
  std::erase_if(comps, [](const auto& c) { return !(c.weight > 0.0); });
  return out;
}

std::optional<Vector> estimate(const ExtendedPossibility& state, double tau_c) {
  const auto& comps = state.on_s.components;
  if (comps.empty()) return std::nullopt;
  auto heavier = [](const GaussianPossibility& a, const GaussianPossibility& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.cov.trace() < b.cov.trace();
  };
  std::size_t top = 0;
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (heavier(comps[i], comps[top])) top = i;
  }
  double runner_up = state.on_s.flat_weight;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (i != top) runner_up = std::max(runner_up, comps[i].weight);
  }
  const double w1 = comps[top].weight;
  if (w1 > state.psi_mass && w1 - runner_up > tau_c) return comps[top].mean;
  return std::nullopt;
}

MaxMixture reduce(const MaxMixture& mix, const ReductionLimits& limits) {
  return cap(merge(dominance_reduce(prune(mix, limits.tau_p)), limits.tau_m), limits.max_components);
}

ExtendedPossibility step(const ExtendedPossibility& state, const SingleTargetParams& p, const ObservationSet& Y) {
  ExtendedPossibility out = update(predict(state, p), p, Y);
  out.on_s = reduce(out.on_s, p.limits);
  return out;
}

}  // namespace opm
