#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <regret/nuisance.hpp>
#include <regret/synthetic.hpp>
#include <regret/types.hpp>

#include "builders.hpp"

using namespace regret;
using regret::testing::make_dataset;
using regret::testing::Row;

TEST(FitClassifier, SeparablePairStaysInsideUnitInterval) {
  RowMatrix x(2, 1);
  x << -1.0, 1.0;
  const std::vector<std::uint8_t> labels{0, 1};
  ClassifierConfig cfg;
  cfg.l2_penalty = 1.0;
  const auto m = fit_classifier(x, labels, cfg);
  const double p0 = m->predict(std::vector<double>{-1.0});
  const double p1 = m->predict(std::vector<double>{1.0});
  EXPECT_GT(p0, 0.0);
  EXPECT_LT(p1, 1.0);
  EXPECT_LT(p0, p1);
}

TEST(FitClassifier, SingleLabelGivesLaplaceConstant) {
  RowMatrix x = RowMatrix::Zero(10, 2);
  const std::vector<std::uint8_t> labels(10, 1);
  const auto m = fit_classifier(x, labels, {});
  EXPECT_NEAR(m->predict(std::vector<double>{3.0, 4.0}), 11.0 / 12.0, 1e-15);
}

TEST(FitClassifier, DeterministicAcrossCalls) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  RowMatrix x(300, 3);
  std::vector<std::uint8_t> labels(300);
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = n01(rng);
    labels[i] = n01(rng) + x(i, 0) > 0 ? 1 : 0;
  }
  const auto a = std::dynamic_pointer_cast<const LogisticModel>(fit_classifier(x, labels, {}));
  const auto b = std::dynamic_pointer_cast<const LogisticModel>(fit_classifier(x, labels, {}));
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->intercept(), b->intercept());
  for (int j = 0; j < 3; ++j) EXPECT_EQ(a->coefficients()[j], b->coefficients()[j]);
  EXPECT_TRUE(a->converged());
}

TEST(FitClassifier, RecoversLogisticCoefficients) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u;
  const int n = 40000;
  RowMatrix x(n, 2);
  std::vector<std::uint8_t> labels(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = n01(rng);
    x(i, 1) = 2.0 + 3.0 * n01(rng);
    const double logit = 0.5 + 1.2 * x(i, 0) - 0.3 * x(i, 1);
    labels[i] = u(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0;
  }
  const auto m = std::dynamic_pointer_cast<const LogisticModel>(fit_classifier(x, labels, {}));
  ASSERT_TRUE(m);
  EXPECT_NEAR(m->logit(std::vector<double>{0.0, 0.0}), 0.5, 0.06);
  EXPECT_NEAR(m->logit(std::vector<double>{1.0, 0.0}) - m->logit(std::vector<double>{0.0, 0.0}), 1.2, 0.05);
  EXPECT_NEAR(m->logit(std::vector<double>{0.0, 1.0}) - m->logit(std::vector<double>{0.0, 0.0}), -0.3, 0.02);
}

TEST(FitClassifier, PredictionsAreFloored) {
  RowMatrix x(40, 1);
  std::vector<std::uint8_t> labels(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i < 20 ? -5.0 - i : 5.0 + i;
    labels[i] = i < 20 ? 0 : 1;
  }
  ClassifierConfig cfg;
  cfg.l2_penalty = 1e-6;
  const auto m = fit_classifier(x, labels, cfg);
  EXPECT_GE(m->predict(std::vector<double>{-1e3}), kProbabilityFloor);
  EXPECT_LE(m->predict(std::vector<double>{1e3}), 1.0 - kProbabilityFloor);
}

TEST(FitClassifier, HistogramLearnerIsMonotoneInScore) {
  RowMatrix x(1000, 1);
  std::vector<std::uint8_t> labels(1000);
  for (int i = 0; i < 1000; ++i) {
    x(i, 0) = i / 1000.0;
    labels[i] = (i * 7919) % 1000 < i ? 1 : 0;
  }
  ClassifierConfig cfg;
  cfg.learner = Learner::histogram;
  const auto m = fit_classifier(x, labels, cfg);
  EXPECT_LT(m->predict(std::vector<double>{0.05}), m->predict(std::vector<double>{0.95}));
}

TEST(FitClassifier, DimensionMismatchRaises) {
  RowMatrix x(3, 1);
  const std::vector<std::uint8_t> labels{0, 1};
  EXPECT_THROW(fit_classifier(x, labels, {}), DataError);
}

TEST(FitNuisances, MsmNeedsNoLevelModels) {
  std::vector<Row> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({{static_cast<double>(i % 7)}, i % 2, 0.5, i % 2 ? (i / 2) % 2 : -1});
  const auto m = fit_nuisances(make_dataset(rows), Msm{1.4}, {});
  EXPECT_TRUE(m.per_level.empty());
  EXPECT_FALSE(m.proximal.has_value());
  EXPECT_TRUE(m.e1 && m.mu1);
}

TEST(FitNuisances, SparseInstrumentLevelIsDropped) {
  std::vector<Row> rows;
  for (int i = 0; i < 105; ++i) {
    const int z = i < 5 ? 2 : i % 2;
    const int d = (i / 3) % 2;
    rows.push_back({{static_cast<double>(i % 11)}, d, 0.5, d ? (i / 5) % 2 : -1, z});
  }
  const auto data = make_dataset(rows, true);
  for (bool pooled : {true, false}) {
    ClassifierConfig cfg;
    cfg.pooled_levels = pooled;
    const auto m = fit_nuisances(data, InstrumentalVariable{"z"}, cfg);
    EXPECT_EQ(m.per_level.size(), 2u);
    EXPECT_EQ(m.per_level.count(2), 0u);
    ASSERT_EQ(m.warnings.size(), 1u);
    EXPECT_NE(m.warnings[0].find("level 2"), std::string::npos);
  }
}

TEST(FitNuisances, NoSelectedRowsCannotIdentifyOutcomeModel) {
  std::vector<Row> rows(10, Row{{0.0}, 0, 0.5, -1});
  EXPECT_THROW(fit_nuisances(make_dataset(rows), Msm{1.2}, {}), DataError);
}

TEST(FitNuisances, PropensityCalibratedOnLogisticTruth) {
  WorldConfig wc;
  wc.confounder_strength = 0.0;
  wc.beta0 = 0.0;
  wc.seed = 17;
  const SyntheticWorld world(wc);
  const auto sample = world.generate(50000, 3);
  const auto truth = world.truth();
  const auto fitted = fit_nuisances(sample.data, Msm{1.4}, {});
  double abs_err = 0.0, sq_err = 0.0;
  for (std::size_t i = 0; i < sample.data.size(); ++i) {
    const auto x = sample.data.x(i);
    const double e = fitted.e1->predict(x) - truth.models.e1->predict(x);
    abs_err += std::abs(e);
    sq_err += e * e;
  }
  const double n = static_cast<double>(sample.data.size());
  EXPECT_LT(abs_err / n, 0.02);
  EXPECT_LT(std::sqrt(sq_err / n), 0.03);
}
