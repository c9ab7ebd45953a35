#include "opm/mixture_reduction.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using opm::GaussianPossibility;
using opm::Matrix;
using opm::MaxMixture;
using opm::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
GaussianPossibility g1(double w, double m, double v) { return {w, v1(m), Matrix::Constant(1, 1, v)}; }

double max_grid_change(const MaxMixture& a, const MaxMixture& b) {
  double worst = 0.0;
  for (double x = -20.0; x <= 20.0; x += 4e-3) {
    worst = std::max(worst, std::abs(opm::eval(a, v1(x)) - opm::eval(b, v1(x))));
  }
  return worst;
}

MaxMixture random_mixture(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> w(1e-6, 1.0), m(-6, 6), v(0.05, 4.0);
  MaxMixture mix;
  for (int i = 0; i < n; ++i) mix.components.push_back(g1(w(rng), m(rng), v(rng)));
  return mix;
}

}  // namespace

TEST(Prune, DropsLightComponents) {
  const auto out = opm::prune(MaxMixture{{g1(1, 0, 1), g1(1e-5, 2, 1)}, 0.0}, 1e-4);
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_EQ(out.components[0].weight, 1.0);
}

TEST(Prune, ZeroThresholdIsIdentity) {
  const MaxMixture mix{{g1(1, 0, 1), g1(1e-9, 2, 1)}, 0.1};
  const auto out = opm::prune(mix, 0.0);
  EXPECT_EQ(out.components.size(), 2u);
  EXPECT_EQ(out.flat_weight, 0.1);
}

TEST(Prune, KeepsHeaviestEvenBelowThreshold) {
  const auto out = opm::prune(MaxMixture{{g1(1e-6, 0, 1), g1(1e-5, 2, 1), g1(1e-7, 3, 1)}, 0.0}, 1e-4);
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_EQ(out.components[0].weight, 1e-5);
}

TEST(Prune, ChangesEvalByAtMostThreshold) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto mix = random_mixture(rng, 8);
    const double tau = 0.2;
    EXPECT_LE(max_grid_change(mix, opm::prune(mix, tau)), tau);
  }
}

TEST(Dominance, ExactDuplicateRemoved) {
  const auto out = opm::dominance_reduce(MaxMixture{{g1(0.6, 1, 2), g1(0.6, 1, 2)}, 0.0});
  EXPECT_EQ(out.components.size(), 1u);
}

TEST(Dominance, NarrowLowComponentUnderWideHighOne) {
  const MaxMixture mix{{g1(0.3, 0, 1), g1(1.0, 0, 2)}, 0.0};
  // Grid confirms 0.3 exp(-x^2/2) <= exp(-x^2/4) everywhere.
  const double gap = oracle::grid_sup_oracle(
      [](double x) { return 0.3 * oracle::gauss1(x, 0, 1) - oracle::gauss1(x, 0, 2); }, -20, 20, 1e-3);
  ASSERT_LE(gap, 0.0);
  const auto out = opm::dominance_reduce(mix);
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_EQ(out.components[0].weight, 1.0);
}

TEST(Dominance, SeparatedComponentsBothKept) {
  const MaxMixture mix{{g1(1.0, -3, 1), g1(0.8, 3, 1)}, 0.0};
  // Each wins somewhere on the grid.
  EXPECT_GT(oracle::grid_sup_oracle([](double x) { return oracle::gauss1(x, -3, 1) - 0.8 * oracle::gauss1(x, 3, 1); },
                                    -20, 20, 1e-3),
            0.0);
  EXPECT_GT(oracle::grid_sup_oracle([](double x) { return 0.8 * oracle::gauss1(x, 3, 1) - oracle::gauss1(x, -3, 1); },
                                    -20, 20, 1e-3),
            0.0);
  EXPECT_EQ(opm::dominance_reduce(mix).components.size(), 2u);
}

TEST(Dominance, BelowFlatRemoved) {
  const auto out = opm::dominance_reduce(MaxMixture{{g1(0.2, 0, 1), g1(0.9, 1, 1)}, 0.5});
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_EQ(out.components[0].weight, 0.9);
}

TEST(Dominance, AgreesWithGridOnRandomPairs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> w(0.05, 1.0), m(-2, 2), v(0.1, 3.0);
  int removed = 0;
  for (int k = 0; k < 300; ++k) {
    const auto a = g1(w(rng), m(rng), v(rng));
    const auto b = g1(w(rng), m(rng), v(rng));
    const double worst = oracle::grid_sup_oracle(
        [&](double x) { return opm::eval(a, v1(x)) - opm::eval(b, v1(x)); }, -30, 30, 1e-3);
    if (opm::dominated_by(a, b)) {
      ++removed;
      EXPECT_LE(worst, 1e-12);
    } else {
      // In one dimension the test is exact up to the lattice resolution.
      EXPECT_GT(worst, -1e-9);
    }
  }
  EXPECT_GT(removed, 10);
}

TEST(Dominance, HigherDimensionNeverDropsContributor) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 200; ++k) {
    const GaussianPossibility a{w(rng), Vector{{0.3 * n01(rng), 0.3 * n01(rng)}}, oracle::random_spd(rng, 2, 0.1, 1.0)};
    const GaussianPossibility b{w(rng), Vector{{0.3 * n01(rng), 0.3 * n01(rng)}}, oracle::random_spd(rng, 2, 0.5, 3.0)};
    if (!opm::dominated_by(a, b)) continue;
    for (double x = -8; x <= 8; x += 0.05)
      for (double y = -8; y <= 8; y += 0.05) {
        const Vector p{{x, y}};
        ASSERT_LE(opm::eval(a, p), opm::eval(b, p) + 1e-12);
      }
  }
}

TEST(Dominance, EvalUnchangedOnRandomMixtures) {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 10; ++k) {
    const auto mix = random_mixture(rng, 12);
    EXPECT_LE(max_grid_change(mix, opm::dominance_reduce(mix)), 1e-12);
  }
}

TEST(Merge, IdenticalComponentsCollapse) {
  const auto out = opm::merge(MaxMixture{{g1(0.7, 1, 2), g1(0.7, 1, 2)}, 0.0}, 3.22);
  EXPECT_EQ(out.components.size(), 1u);
}

TEST(Merge, ZeroThresholdIsIdentityForDistinctMeans) {
  const MaxMixture mix{{g1(1, 0, 1), g1(0.9, 0.1, 1), g1(0.5, -0.2, 3)}, 0.0};
  const auto out = opm::merge(mix, 0.0);
  ASSERT_EQ(out.components.size(), 3u);
  EXPECT_LE(max_grid_change(mix, out), 0.0);
}

TEST(Merge, CloseComponentsKeepHeavierPeak) {
  const MaxMixture mix{{g1(1, 0, 1), g1(0.9, 0.1, 1)}, 0.0};
  const auto report = opm::merge_with_report(mix, 3.22);
  ASSERT_EQ(report.mixture.components.size(), 1u);
  const auto& s = report.mixture.components[0];
  EXPECT_EQ(s.weight, 1.0);
  EXPECT_EQ(s.mean(0), 0.0);
  EXPECT_EQ(report.merged_pairs, 1u);
  // The heavier component already covers the absorbed peak.
  EXPECT_EQ(report.max_peak_deficit, 0.0);
  EXPECT_GE(opm::eval(s, v1(0.1)), 0.9);
  // Grid error of the merged mixture, measured by the oracle: the absorbed
  // tail exceeds the survivor by at most ~0.0145 near x = 1.7.
  const double err = oracle::grid_sup_oracle(
      [&](double x) { return std::abs(opm::eval(mix, v1(x)) - opm::eval(report.mixture, v1(x))); }, -20, 20, 1e-3);
  EXPECT_NEAR(err, 0.014489, 1e-5);
}

TEST(Merge, InflatesCovarianceToReachAbsorbedPeak) {
  const MaxMixture mix{{g1(1, 0, 1), g1(0.5, 2.5, 1)}, 0.0};
  const auto report = opm::merge_with_report(mix, 3.22);
  ASSERT_EQ(report.mixture.components.size(), 1u);
  EXPECT_GT(report.mixture.components[0].cov(0, 0), 1.0);
  EXPECT_NEAR(opm::eval(report.mixture, v1(2.5)), 0.5, 1e-12);
  EXPECT_NEAR(report.max_peak_deficit, 0.0, 1e-12);
}

TEST(Merge, NeverIncreasesComponentCount) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const auto mix = random_mixture(rng, 15);
    const auto out = opm::merge(mix, 3.22);
    EXPECT_LE(out.components.size(), mix.components.size());
    EXPECT_DOUBLE_EQ(opm::sup(out), opm::sup(mix));
  }
}

TEST(Cap, KeepsHeaviest) {
  const auto out = opm::cap(MaxMixture{{g1(0.2, 0, 1), g1(0.9, 1, 1), g1(0.5, 2, 1)}, 0.0}, 2);
  ASSERT_EQ(out.components.size(), 2u);
  EXPECT_EQ(opm::sup(out), 0.9);
  for (const auto& c : out.components) EXPECT_GE(c.weight, 0.5);
}

TEST(RemoveDuplicates, OnlyExactCopies) {
  const auto out = opm::remove_duplicates(MaxMixture{{g1(0.5, 0, 1), g1(0.5, 0, 1), g1(0.5, 1e-12, 1)}, 0.0});
  EXPECT_EQ(out.components.size(), 2u);
}
