#include <gtest/gtest.h>

#include <regret/experiments.hpp>

using namespace regret;

namespace {

ExperimentConfig small(std::size_t trials, std::size_t n = 1500) {
  ExperimentConfig c;
  c.trials = trials;
  c.n = n;
  c.seed = 3;
  c.estimation.bootstrap_b = 0;
  return c;
}

}  // namespace

TEST(Coverage, ZeroTrialsRejected) {
  EXPECT_THROW(coverage_experiment({}, {1000}, Msm{1.4}, small(0)), ConfigError);
}

TEST(Coverage, TableShapeAndJobsIndependence) {
  auto c = small(4);
  const auto a = coverage_experiment({}, {800, 1600}, Msm{1.4}, c);
  c.jobs = 3;
  const auto b = coverage_experiment({}, {800, 1600}, Msm{1.4}, c);
  EXPECT_EQ(a.rows.size(), 2u * 4u * 2u);
  EXPECT_EQ(trial_table_csv(a, "n"), trial_table_csv(b, "n"));
  EXPECT_EQ(summary_csv(a, "n"), summary_csv(b, "n"));
  const auto& s = a.at(800, "accuracy", Method::delta);
  EXPECT_EQ(s.trials, 4u);
  EXPECT_GE(s.coverage, 0.0);
  EXPECT_LE(s.coverage, 1.0);
}

TEST(Sweep, LambdaStarOutsideAssumptionLosesCoverage) {
  const auto t = violation_sweep({}, SweepKnob::lambda_star, {1.0, 3.0}, Msm{1.4}, small(10, 4000));
  EXPECT_GT(t.at(1.0, "accuracy", Method::delta).coverage, t.at(3.0, "accuracy", Method::delta).coverage);
}

TEST(Sweep, UnknownKnobRejected) { EXPECT_THROW(parse_sweep_knob("gamma"), ConfigError); }

TEST(Sensitivity, DeltaThresholdNeverBelowBaseline) {
  auto c = small(3, 3000);
  const auto all = standard_measures();
  c.measures.assign(all.begin(), all.end());
  const auto rows = design_sensitivity({}, {1.0, 1.2, 1.4, 1.6, 2.0, 3.0}, c);
  EXPECT_EQ(rows.size(), 15u);
  for (const auto& r : rows) {
    if (r.failed) continue;
    EXPECT_GE(r.lambda0_delta, r.lambda0_baseline) << r.measure;
  }
}

TEST(Sensitivity, GridMustAscendFromOne) {
  EXPECT_THROW(design_sensitivity({}, {0.9, 1.4}, small(1)), ConfigError);
  EXPECT_THROW(design_sensitivity({}, {1.0, 1.4, 1.2}, small(1)), ConfigError);
}

TEST(Separation, BoundHoldsAndPredictiveValueGapIsZero) {
  const auto rows = separation_characterization(200, 5);
  EXPECT_EQ(rows.size(), 1000u);
  for (const auto& r : rows) {
    EXPECT_GE(r.improvement - r.bound, -1e-9) << r.measure;
    if (r.measure == "ppv") EXPECT_NEAR(r.improvement, 0.0, 1e-12);
    if (r.alpha == 0.0) EXPECT_EQ(r.bound, 0.0);
  }
}

TEST(Separation, RandomSetsAreValid) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) EXPECT_NO_THROW(random_uncertainty_set(rng).validate());
}
