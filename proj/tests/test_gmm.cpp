#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "stochem/errors.hpp"
#include "stochem/gmm.hpp"

using namespace stochem;

namespace {

Parameter two(double w, double m1, double m2) {
  const double r[] = {w};
  const double mu[] = {m1, m2};
  return make_gmm_params(r, mu);
}

}  // namespace

TEST(Gmm, ResponsibilitiesStable) {
  const auto theta = two(0.3, -1.0, 2.0);
  for (double y : {-1e6, -3.0, 0.0, 0.5, 1e6}) {
    const auto r = responsibilities(y, theta);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_TRUE(std::isfinite(r[0]) && std::isfinite(r[1]));
    EXPECT_NEAR(r[0] + r[1], 1.0, 1e-15);
  }
  // Bayes rule at y = 0.5.
  const double a = 0.3 * std::exp(-0.5 * 1.5 * 1.5), b = 0.7 * std::exp(-0.5 * 1.5 * 1.5);
  EXPECT_NEAR(responsibilities(0.5, theta)[0], a / (a + b), 1e-15);
}

TEST(Gmm, MStepClosedForm) {
  GmmModel model({-1.0, 0.2, 1.5, 2.0}, GmmConfig{});
  const auto theta = two(0.4, -0.5, 1.0);
  const SuffStats s = full_estep(model, theta);
  const Parameter next = model.m_step(s);
  const double eps = 1e-3, delta = 1e-3;
  const double s1 = s.block(kGmmWeightMass)[0];
  const double s2 = s.block(kGmmWeightedObs)[0];
  const double s3 = s.block(kGmmObsMean)[0];
  EXPECT_NEAR(gmm_weights(next)[0], (s1 + eps) / (1 + 2 * eps), 1e-15);
  EXPECT_NEAR(gmm_means(next)[0], s2 / (s1 + delta), 1e-14);
  EXPECT_NEAR(gmm_means(next)[1], (s3 - s2) / (1 - s1 + delta), 1e-14);
}

TEST(Gmm, MStepRejectsBoundaryWithoutPenalty) {
  GmmConfig cfg;
  cfg.epsilon = 0.0;
  cfg.delta = 0.0;
  GmmModel model({1.0, 2.0}, cfg);
  SuffStats s(model.stat_layout());
  s.block(kGmmWeightMass)[0] = 0.0;
  EXPECT_THROW(model.m_step(s), DomainError);
}

TEST(Gmm, PrecisionIsPermutationInvariant) {
  const auto ref = two(0.5, 0.5, -0.5);
  const auto swapped = two(0.5, -0.5, 0.5);
  EXPECT_EQ(precision_metric(swapped, ref), 0.0);
  EXPECT_NEAR(precision_metric(two(0.5, 0.6, -0.5), ref), 0.01, 1e-15);
}

TEST(Gmm, DataIsSeededAndNested) {
  const auto truth = two(0.5, 0.5, -0.5);
  const auto a = generate_gmm_data(100, truth, 9);
  const auto b = generate_gmm_data(300, truth, 9);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_NE(a, generate_gmm_data(100, truth, 10));
}

TEST(Gmm, BatchEmDecreasesObjective) {
  const auto data = generate_gmm_data(500, two(0.5, 0.5, -0.5), 1);
  GmmModel model(data, GmmConfig{});
  Rng r(2);
  Parameter theta = model.initial_parameter(r);
  double prev = penalized_objective(model, theta);
  for (int k = 0; k < 50; ++k) {
    theta = model.m_step(full_estep(model, theta));
    const double cur = penalized_objective(model, theta);
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(Gmm, RejectsNonFiniteData) {
  EXPECT_THROW(GmmModel({1.0, std::nan("")}, GmmConfig{}), ValidationError);
  EXPECT_THROW(GmmModel({}, GmmConfig{}), ContractError);
}
