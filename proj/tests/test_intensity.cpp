#include "opm/intensity_filter.hpp"
#include "opm/mixture_reduction.hpp"
#include "opm/scenario.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using opm::GaussianPossibility;
using opm::IntensityMixture;
using opm::Matrix;
using opm::MultiTargetParams;
using opm::ObservationSet;
using opm::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Matrix m1(double a) { return Matrix::Constant(1, 1, a); }
GaussianPossibility g1(double w, double m, double v) { return {w, v1(m), m1(v)}; }

MultiTargetParams scalar_model() {
  MultiTargetParams p;
  p.F = m1(1.0);
  p.Q = m1(0.1);
  p.H = m1(1.0);
  p.R = m1(0.5);
  return p;
}

MultiTargetParams ncv_model() {
  MultiTargetParams p;
  p.F = opm::ncv_transition(0.1);
  p.Q = opm::ncv_process_noise(0.1, 1.5);
  p.H = opm::position_observation();
  p.R = m1(0.0625);
  return p;
}

bool same_set(std::vector<GaussianPossibility> a, std::vector<GaussianPossibility> b) {
  auto less = [](const GaussianPossibility& x, const GaussianPossibility& y) {
    return std::lexicographical_compare(x.mean.data(), x.mean.data() + x.mean.size(), y.mean.data(),
                                        y.mean.data() + y.mean.size()) ||
           (x.mean == y.mean && x.weight < y.weight);
  };
  std::sort(a.begin(), a.end(), less);
  std::sort(b.begin(), b.end(), less);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].weight != b[i].weight || a[i].mean != b[i].mean || a[i].cov != b[i].cov) return false;
  return true;
}

}  // namespace

TEST(SumIntensities, ZeroIsIdentity) {
  const IntensityMixture F1{0.2, {g1(0.9, 1, 1), g1(0.5, -3, 0.5)}};
  const auto out = opm::sum_intensities(F1, IntensityMixture{});
  EXPECT_EQ(out.floor, 0.2);
  EXPECT_EQ(out.components.size(), 2u);
}

TEST(SumIntensities, FloorIsMax) {
  EXPECT_EQ(opm::sum_intensities(IntensityMixture{0.3, {}}, IntensityMixture{0.5, {}}).floor, 0.5);
}

TEST(SumIntensities, PointwiseMaxOnGrid) {
  const IntensityMixture a{0.0, {g1(0.9, 0, 1)}};
  const IntensityMixture b{0.1, {g1(0.7, 0.5, 0.3), g1(0.2, 0.1, 2)}};
  const auto s = opm::sum_intensities(a, b);
  for (double x = -10; x <= 10; x += 1e-3) {
    EXPECT_NEAR(opm::eval(s, v1(x)), std::max(opm::eval(a, v1(x)), opm::eval(b, v1(x))), 1e-12);
  }
}

TEST(Propagate, ZeroPriorGivesBirthFloor) {
  auto p = scalar_model();
  const auto out = opm::propagate_intensity(IntensityMixture{}, p);
  EXPECT_EQ(out.floor, 0.5);
  EXPECT_TRUE(out.components.empty());
}

TEST(Propagate, SingleComponentWithoutBirth) {
  auto p = scalar_model();
  p.birth = IntensityMixture{};
  const auto out = opm::propagate_intensity(IntensityMixture{0.0, {g1(1, 2, 1)}}, p);
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_EQ(out.components[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(out.components[0].cov(0, 0), 1.1);
}

TEST(Propagate, FloorMatchesGridSupConvolution) {
  auto p = scalar_model();
  p.a_pi = 0.9;
  p.birth = IntensityMixture{0.5, {}};
  const IntensityMixture Fm{0.8, {}};
  const auto out = opm::propagate_intensity(Fm, p);
  for (double x : {-3.0, 0.0, 2.5}) {
    const double conv = oracle::grid_sup_oracle(
        [&](double xp) { return opm::eval(Fm, v1(xp)) * p.a_pi * oracle::gauss1(x, xp, 0.1); }, -20, 20, 1e-3);
    EXPECT_NEAR(opm::eval(out, v1(x)), std::max(conv, 0.5), 1e-6);
  }
  EXPECT_DOUBLE_EQ(out.floor, 0.72);
}

TEST(Update, EmptyScanScalesByDetectionFailure) {
  auto p = scalar_model();
  const IntensityMixture Fp{0.4, {g1(0.9, 1, 1)}};
  const auto out = opm::update_intensity(Fp, p, {});
  EXPECT_DOUBLE_EQ(out.floor, 0.08);
  ASSERT_EQ(out.components.size(), 1u);
  EXPECT_DOUBLE_EQ(out.components[0].weight, 0.18);
}

TEST(Update, TotalIgnoranceYieldsUnitPeaks) {
  auto p = ncv_model();
  p.clutter.constant = 0.3;
  const IntensityMixture Fp{1.0, {}};
  const auto out = opm::update_intensity(Fp, p, {v1(2.0), v1(-5.0)});
  ASSERT_EQ(out.components.size(), 2u);
  for (const auto& c : out.components) EXPECT_DOUBLE_EQ(c.weight, 1.0);
  EXPECT_DOUBLE_EQ(out.floor, 0.2);
}

TEST(Update, MatchesFormulaOnGrid) {
  auto p = scalar_model();
  p.clutter.constant = 0.4;
  const IntensityMixture Fp{0.1, {g1(0.9, 0, 1), g1(0.6, 4, 0.5)}};
  const ObservationSet Y{v1(0.4), v1(3.0)};
  const auto out = opm::update_intensity(Fp, p, Y);
  auto h = [&](double y, double x) { return oracle::gauss1(y, x, 0.5); };
  std::vector<double> denom;
  for (const auto& y : Y) {
    const double s = oracle::grid_sup_oracle([&](double x) { return opm::eval(Fp, v1(x)) * h(y(0), x); }, -20, 20, 1e-3);
    denom.push_back(std::max(s, 0.4));
  }
  // The floor-born component carries a wide prior on unobserved coordinates
  // only; in one dimension it is exactly floor * h(y | x).
  for (double x = -6; x <= 8; x += 0.01) {
    double ref = p.a_df * opm::eval(Fp, v1(x));
    for (std::size_t k = 0; k < Y.size(); ++k) ref = std::max(ref, opm::eval(Fp, v1(x)) * h(Y[k](0), x) / denom[k]);
    EXPECT_NEAR(opm::eval(out, v1(x)), ref, 1e-6) << x;
  }
}

TEST(Update, DuplicateObservationSameComponents) {
  auto p = ncv_model();
  const IntensityMixture Fp{0.5, {GaussianPossibility{0.9, Vector{{0.0, 1.0}}, Matrix::Identity(2, 2)}}};
  const auto a = opm::update_intensity(Fp, p, {v1(0.2), v1(3.0)});
  const auto b = opm::update_intensity(Fp, p, {v1(0.2), v1(3.0), v1(0.2)});
  EXPECT_EQ(a.floor, b.floor);
  EXPECT_TRUE(same_set(a.components, b.components));
}

TEST(Update, FarObservationLeavesExistingWeights) {
  auto p = ncv_model();
  p.birth = IntensityMixture{};
  const IntensityMixture Fp{0.0, {GaussianPossibility{0.9, Vector{{0.0, 0.0}}, Matrix::Identity(2, 2) * 0.01}}};
  const auto a = opm::update_intensity(Fp, p, {v1(0.05)});
  const auto b = opm::update_intensity(Fp, p, {v1(0.05), v1(50.0)});
  auto weight_near_zero = [](const IntensityMixture& F) {
    double w = 0.0;
    for (const auto& c : F.components)
      if (std::abs(c.mean(0)) < 1.0) w = std::max(w, c.weight);
    return w;
  };
  EXPECT_LT(std::abs(weight_near_zero(a) - weight_near_zero(b)), 1e-50);
}

TEST(Update, BoundedByOneAcrossRandomScenarios) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-10, 10), q(-12, 12);
  std::poisson_distribution<int> pn(4.0);
  auto p = ncv_model();
  p.clutter.constant = 0.5;
  for (int run = 0; run < 5; ++run) {
    IntensityMixture F;
    for (int t = 0; t < 50; ++t) {
      ObservationSet Y;
      for (int k = pn(rng); k > 0; --k) Y.push_back(v1(u(rng)));
      F = opm::intensity_step(F, p, Y);
      for (int k = 0; k < 40; ++k) {
        const Vector x{{q(rng), 3.0 * (u(rng) / 10.0)}};
        ASSERT_LE(opm::eval(F, x), 1.0 + 1e-12);
      }
    }
  }
}

TEST(CardinalitySpatial, Examples) {
  const auto full = opm::recover_cardinality_spatial(IntensityMixture{0.0, {g1(1.0, 0, 1)}});
  EXPECT_EQ(full.cardinality(5), 1.0);
  const auto half = opm::recover_cardinality_spatial(IntensityMixture{0.1, {g1(0.5, 0, 1)}});
  EXPECT_DOUBLE_EQ(half.cardinality(2), 0.25);
  const auto zero = opm::recover_cardinality_spatial(IntensityMixture{});
  EXPECT_EQ(zero.sup_value, 0.0);
  EXPECT_EQ(opm::eval(zero.spatial, v1(3.0)), 1.0);
}

TEST(CardinalitySpatial, RoundTrip) {
  const IntensityMixture F{0.05, {g1(0.6, 0, 1), g1(0.3, 2, 0.4)}};
  const auto cs = opm::recover_cardinality_spatial(F);
  for (double x = -5; x <= 5; x += 0.01) {
    EXPECT_DOUBLE_EQ(cs.sup_value * opm::eval(cs.spatial, v1(x)), opm::eval(F, v1(x)));
  }
}

TEST(Extract, Examples) {
  EXPECT_TRUE(opm::extract_targets(IntensityMixture{}, 0.8).empty());
  EXPECT_EQ(opm::extract_targets(IntensityMixture{0.2, {g1(1.0, 1, 1)}}, 0.8).size(), 1u);
  EXPECT_TRUE(opm::extract_targets(IntensityMixture{0.6, {g1(0.5, 1, 1)}}, 0.4).empty());
}

TEST(Extract, OnePerCluster) {
  const IntensityMixture F{0.0, {g1(1.0, 0, 1), g1(0.95, 0.5, 1), g1(0.95, 10, 1)}};
  const auto xs = opm::extract_targets(F, 0.9);
  ASSERT_EQ(xs.size(), 2u);
}

TEST(Step, TwoTargetsAreFound) {
  auto p = ncv_model();
  p.clutter.constant = 0.5;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  IntensityMixture F;
  double a = -5.0, b = 5.0;
  for (int t = 0; t < 15; ++t) {
    a += 0.1;
    b -= 0.1;
    F = opm::intensity_step(F, p, {v1(a + 0.25 * n01(rng)), v1(b + 0.25 * n01(rng))});
  }
  const auto xs = opm::extract_targets(F, 0.9);
  ASSERT_EQ(xs.size(), 2u);
  const double lo = std::min(xs[0](0), xs[1](0)), hi = std::max(xs[0](0), xs[1](0));
  EXPECT_NEAR(lo, a, 1.0);
  EXPECT_NEAR(hi, b, 1.0);
}

TEST(Params, Validation) {
  auto p = scalar_model();
  EXPECT_NO_THROW(p.validate());
  p.a_df = 1.5;
  EXPECT_THROW(p.validate(), opm::InputError);
}
