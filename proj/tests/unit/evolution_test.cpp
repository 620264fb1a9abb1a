#include "helpers.hpp"
#include "jmgt/diagnostics/identities.hpp"
#include "jmgt/spectral/checks.hpp"

#include <gtest/gtest.h>

using namespace jmgt;
using namespace testing_support;

namespace {

// smooth data keep the stiff near-grid-scale modes out of the comparison
Scenario mode_scenario(double dt, double theta) {
  const auto m = interval(20);
  Scenario sc = scenario(m, 1.0, dt, 1, true);
  InitialDataSpec spec;
  spec.shape = "mode";
  spec.h_size = 1.0;
  sc.initial = make_initial_data(*m, spec);
  sc.theta = theta;
  return sc;
}

double error_against_exponential(const Scenario& sc) {
  const Trajectory tr = integrate(sc);
  const StateVector exact = matrix_exponential_oracle(sc.model->generator, sc.T, sc.initial);
  const Vec diff = tr.states.back().stacked() - exact.stacked();
  return diff.norm() / exact.stacked().norm();
}

}  // namespace

TEST(Evolution, CrankNicolsonSecondOrderAgainstExponential) {
  const double e1 = error_against_exponential(mode_scenario(0.0025, 0.5));
  const double e2 = error_against_exponential(mode_scenario(0.00125, 0.5));
  EXPECT_LT(e2, 1e-4);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
}

TEST(Evolution, BackwardEulerFirstOrder) {
  // the order approaches one slowly because the grid-scale modes are only weakly damped
  const double e1 = error_against_exponential(mode_scenario(0.0003125, 1.0));
  const double e2 = error_against_exponential(mode_scenario(0.00015625, 1.0));
  EXPECT_GT(std::log2(e1 / e2), 0.75);
  EXPECT_LT(std::log2(e1 / e2), 1.2);
}

TEST(Evolution, ZeroDataStayZero) {
  Scenario sc = scenario(interval(10), 0.5, 0.01, 1, true);
  sc.initial = StateVector::zeros(sc.model->n());
  const Trajectory tr = integrate(sc);
  EXPECT_EQ(tr.states.back().stacked().norm(), 0.0);
}

TEST(Evolution, StrideAndSampleTimes) {
  Scenario sc = scenario(interval(10), 1.0, 0.01, 10);
  const Trajectory tr = integrate(sc);
  ASSERT_EQ(tr.times.size(), 11u);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
  EXPECT_EQ(tr.energies.size(), tr.times.size());
  EXPECT_TRUE(tr.states.empty());
}

TEST(Evolution, RejectsBadScenarios) {
  Scenario sc = scenario(interval(10), 1.0, 0.01);
  sc.dt = 0.0;
  EXPECT_THROW(integrate(sc), ConfigurationError);
  sc.dt = 2.0;
  EXPECT_THROW(integrate(sc), ConfigurationError);
  sc.dt = 0.01;
  sc.stride = 0;
  EXPECT_THROW(integrate(sc), ConfigurationError);
}

TEST(Evolution, CompatibleBumpHasSmallResidual) {
  const Trajectory tr = integrate(scenario(square(8), 0.0, 0.01));
  EXPECT_FALSE(tr.compatibility.warn);
}

TEST(Energy, ConservedWithoutBoundaryDamping) {
  Scenario sc = scenario(interval(50, "endpoint0", 0.0, 0.0), 5.0, 0.01, 10);
  const Trajectory tr = integrate(sc);
  const double E1 = tr.energies.front().E1;
  for (const auto& e : tr.energies) EXPECT_NEAR(e.E1, E1, 1e-11 * E1);
}

TEST(Energy, IdentityResidualSmall) {
  Scenario sc = scenario(interval(60), 2.0, 1e-3, 1, true);
  const Trajectory tr = integrate(sc);
  const IdentityResidual r = energy_identity_residual(tr, 0.0, 2.0);
  EXPECT_LT(r.relative, 1e-4);
}

TEST(Energy, DecaysWithDamping) {
  const Trajectory tr = integrate(scenario(square(6), 3.0, 0.01, 10));
  for (std::size_t i = 1; i < tr.energies.size(); ++i) EXPECT_LE(tr.energies[i].E, tr.energies[i - 1].E * (1 + 1e-12));
}

TEST(Identities, VariationOfParametersAndHigherIdentity) {
  Scenario sc = scenario(interval(60), 2.0, 1e-3, 1, true);
  const Trajectory tr = integrate(sc);
  EXPECT_LT(variation_of_parameters_residual(tr).relative, 1e-3);
  EXPECT_LT(higher_identity_residual(tr, 0.0, 2.0).relative, 1e-2);
}

TEST(Identities, NeedStoredStates) {
  const Trajectory tr = integrate(scenario(interval(10), 0.5, 0.01));
  EXPECT_THROW(variation_of_parameters_residual(tr), DiagnosticError);
}

TEST(Nonlinear, SmallDataFollowLinearRun) {
  Scenario sc = scenario(interval(40), 1.0, 0.01);
  sc.initial = sc.initial.scaled(1e-4);
  const Trajectory lin = integrate(sc);
  sc.nonlinear = true;
  const Trajectory nl = integrate(sc);
  EXPECT_FALSE(nl.stats.halted);
  EXPECT_NEAR(nl.energies.back().E / lin.energies.back().E, 1.0, 1e-3);
}
