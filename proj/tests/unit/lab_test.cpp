#include "helpers.hpp"
#include "jmgt/lab/experiments.hpp"

#include <gtest/gtest.h>

using namespace jmgt;
using namespace testing_support;

TEST(Fit, ExactExponential) {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.05 * i);
    v.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const DecayFit f = fit_decay_rate(t, v, {0.0, 5.0});
  EXPECT_NEAR(f.omega, 2.0, 1e-10);
  EXPECT_NEAR(f.M, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
}

TEST(Fit, ConstantSeries) {
  std::vector<double> t, v;
  for (int i = 0; i <= 50; ++i) {
    t.push_back(i);
    v.push_back(4.0);
  }
  const DecayFit f = fit_decay_rate(t, v, {10.0, 40.0});
  EXPECT_NEAR(f.omega, 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  EXPECT_EQ(f.points, 31);
}

TEST(Fit, Errors) {
  std::vector<double> t, v;
  for (int i = 0; i <= 50; ++i) {
    t.push_back(i);
    v.push_back(1.0);
  }
  v[20] = 0.0;
  EXPECT_THROW(fit_decay_rate(t, v, {10.0, 40.0}), FitError);
  v[20] = 1.0;
  EXPECT_THROW(fit_decay_rate(t, v, {10.0, 14.0}), FitError);
  EXPECT_THROW(fit_decay_rate(t, v, {10.0, 60.0}), FitError);
}

TEST(Experiments, ConservationPreconditions) {
  EXPECT_THROW(experiment_conservation(scenario(interval(20), 1.0, 0.01)), ExperimentPreconditionError);
  EXPECT_THROW(experiment_conservation(scenario(interval(20, "endpoint0", 0.1, 0.0), 1.0, 0.01)),
               ExperimentPreconditionError);
  const ConservationReport r = experiment_conservation(scenario(interval(20, "endpoint0", 0.0, 0.0), 1.0, 0.01));
  EXPECT_LT(r.max_drift, 1e-11);
}

TEST(Experiments, GrowthForNegativeGamma) {
  Scenario sc = scenario(interval(40, "endpoint0", -0.2, 0.0), 40.0, 0.02, 5);
  const GrowthReport r = experiment_growth(sc);
  EXPECT_TRUE(r.growth);
}

TEST(Experiments, StabilityNeedsNonnegativeGamma) {
  EXPECT_THROW(experiment_two_level(scenario(interval(20, "endpoint0", -0.1), 5.0, 0.01)), ExperimentPreconditionError);
}

TEST(Experiments, RightmostModeDecaysAtAbscissa) {
  const auto m = interval(30);
  double sigma = 0.0;
  Scenario sc = scenario(m, 20.0, 1e-3, 20);
  sc.initial = rightmost_mode(*m, &sigma);
  EXPECT_NEAR(h_norm(sc.initial, *m), 1.0, 1e-12);
  const DecayRateReport r = experiment_decay_rate(sc);
  EXPECT_NEAR(r.sigma, sigma, 1e-12);
  EXPECT_TRUE(r.pass) << r.relative_gap;
}
