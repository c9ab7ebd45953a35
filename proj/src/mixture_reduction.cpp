#include "opm/mixture_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace opm {

namespace {

std::vector<std::size_t> order_by_weight_desc(const std::vector<GaussianPossibility>& comps) {
  std::vector<std::size_t> idx(comps.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return comps[a].weight > comps[b].weight; });
  return idx;
}

MaxMixture keep(const MaxMixture& mix, const std::vector<bool>& retained) {
  MaxMixture out;
  out.flat_weight = mix.flat_weight;
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    if (retained[i]) out.components.push_back(mix.components[i]);
  }
  return out;
}

struct Precomputed {
  double log_weight;
  Matrix precision;
};

bool dominated_impl(const GaussianPossibility& ci, const Precomputed& pi, const GaussianPossibility& cj,
                    const Precomputed& pj) {
  if (ci.weight > cj.weight) return false;
  const Vector delta = cj.mean - ci.mean;
  const Vector pj_delta = pj.precision * delta;
  const double log_ratio = pj.log_weight - pi.log_weight;
  const double at_mean = log_ratio - 0.5 * delta.dot(pj_delta);
  // Necessary condition: the candidate's own peak must already be covered.
  if (at_mean < 0.0) return false;

  const Matrix A = pi.precision - pj.precision;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    return ci.cov == cj.cov && delta.isZero(0.0);
  }
  // Minimum over u = x - m_i of  log(w_j/w_i) + u'P_i u/2 - (u-d)'P_j(u-d)/2.
  const double min_gap = at_mean - 0.5 * pj_delta.dot(llt.solve(pj_delta));
  return min_gap >= 0.0;
}

Precomputed precompute(const GaussianPossibility& g) {
  Eigen::LLT<Matrix> llt(g.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("dominance_reduce: covariance is not positive-definite");
  return Precomputed{std::log(g.weight), llt.solve(Matrix::Identity(g.cov.rows(), g.cov.cols()))};
}

}  // namespace

MaxMixture prune(const MaxMixture& mix, double tau_p) {
  if (mix.components.empty()) return mix;
  const auto best = static_cast<std::size_t>(
      std::max_element(mix.components.begin(), mix.components.end(),
                       [](const auto& a, const auto& b) { return a.weight < b.weight; }) -
      mix.components.begin());
  std::vector<bool> retained(mix.components.size());
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    retained[i] = i == best || mix.components[i].weight >= tau_p;
  }
  return keep(mix, retained);
}

bool dominated_by(const GaussianPossibility& candidate, const GaussianPossibility& other) {
  return dominated_impl(candidate, precompute(candidate), other, precompute(other));
}

MaxMixture dominance_reduce(const MaxMixture& mix) {
  const auto& comps = mix.components;
  const std::size_t n = comps.size();
  std::vector<bool> retained(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (comps[i].weight <= mix.flat_weight) retained[i] = false;
  }

  std::vector<Precomputed> pre;
  pre.reserve(n);
  for (const auto& c : comps) pre.push_back(precompute(c));

  // Weakest first; a component is only ever compared against survivors, so
  // of two identical components exactly one is kept.
  auto order = order_by_weight_desc(comps);
  std::reverse(order.begin(), order.end());
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    if (!retained[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !retained[j]) continue;
      if (dominated_impl(comps[i], pre[i], comps[j], pre[j])) {
        retained[i] = false;
        break;
      }
    }
  }
  return keep(mix, retained);
}

MergeReport merge_with_report(const MaxMixture& mix, double tau_m) {
  const auto& comps = mix.components;
  const std::size_t n = comps.size();
  const double gate = tau_m * tau_m;
  const auto order = order_by_weight_desc(comps);
  std::vector<bool> absorbed(n, false);

  MergeReport report;
  report.mixture.flat_weight = mix.flat_weight;
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    if (absorbed[i]) continue;
    const auto& ci = comps[i];
    Eigen::LLT<Matrix> llt(ci.cov);
    if (llt.info() != Eigen::Success) throw NumericalError("merge: covariance is not positive-definite");

    GaussianPossibility survivor = ci;
    std::vector<std::size_t> members;
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      const std::size_t j = order[oj];
      if (absorbed[j]) continue;
      const auto& cj = comps[j];
      const Vector delta = cj.mean - ci.mean;
      const double d2 = llt.matrixL().solve(delta).squaredNorm();
      if (d2 > gate) continue;
      absorbed[j] = true;
      members.push_back(j);
      if (d2 == 0.0) continue;
      // Reach w_j at m_j:  d2 / (1 + s d2) <= 2 log(w_i / w_j).
      const double budget = 2.0 * std::log(ci.weight / cj.weight);
      double scale = 1.0;
      if (budget >= d2) {
        scale = 0.0;
      } else if (budget > 0.0) {
        scale = std::min(1.0, (d2 - budget) / (budget * d2));
      }
      survivor.cov += scale * delta * delta.transpose();
    }
    if (!members.empty()) {
      Eigen::LLT<Matrix> merged_llt(survivor.cov);
      for (const auto j : members) {
        const double reached = survivor.weight * gaussian_possibility_value(merged_llt, comps[j].mean - survivor.mean);
        report.max_peak_deficit = std::max(report.max_peak_deficit, comps[j].weight - reached);
      }
      report.merged_pairs += members.size();
    }
    report.mixture.components.push_back(std::move(survivor));
  }
  return report;
}

MaxMixture merge(const MaxMixture& mix, double tau_m) { return merge_with_report(mix, tau_m).mixture; }

MaxMixture cap(const MaxMixture& mix, std::size_t max_components) {
  if (mix.components.size() <= max_components) return mix;
  const auto order = order_by_weight_desc(mix.components);
  std::vector<bool> retained(mix.components.size(), false);
  for (std::size_t k = 0; k < max_components; ++k) retained[order[k]] = true;
  return keep(mix, retained);
}

MaxMixture remove_duplicates(const MaxMixture& mix) {
  MaxMixture out;
  out.flat_weight = mix.flat_weight;
  for (const auto& c : mix.components) {
    const bool seen = std::any_of(out.components.begin(), out.components.end(), [&](const auto& o) {
      return o.weight == c.weight && o.mean == c.mean && o.cov == c.cov;
    });
    if (!seen) out.components.push_back(c);
  }
  return out;
}

}  // namespace opm
