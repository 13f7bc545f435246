#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <regret/bounds.hpp>
#include <regret/estimation.hpp>
#include <regret/synthetic.hpp>
#include <regret/vstats.hpp>

#include "builders.hpp"

using namespace regret;
using regret::testing::make_dataset;
using regret::testing::Row;

namespace {

OracleSample msm_sample(std::size_t n, std::uint64_t seed, std::uint64_t world_seed = 5) {
  WorldConfig wc;
  wc.seed = world_seed;
  return SyntheticWorld(wc).generate(n, seed);
}

EstimationConfig no_bootstrap(std::uint64_t seed = 1) {
  EstimationConfig c;
  c.bootstrap_b = 0;
  c.seed = seed;
  return c;
}

double sd(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ObservationalDataset with_groups(const ObservationalDataset& data, const std::vector<std::string>& groups) {
  DatasetColumns c = data.columns();
  c.group = groups;
  c.group_name = "g";
  return ObservationalDataset(std::move(c));
}

}  // namespace

TEST(EstimationConfig, RejectsInvalidSettings) {
  EstimationConfig c;
  c.k_folds = 1;
  EXPECT_THROW(c.validate(Msm{1.2}), ConfigError);
  c = {};
  c.estimator = Estimator::doubly_robust;
  EXPECT_NO_THROW(c.validate(RosenbaumGamma{1.5}));
  EXPECT_THROW(c.validate(InstrumentalVariable{"z"}), ConfigError);
  EXPECT_THROW(c.validate(Manski{}), ConfigError);
}

TEST(Folds, BalancedAndIndependentOfRowOrder) {
  const auto s = msm_sample(1001, 3);
  const auto plan = assign_folds(s.data, 3, 42);
  std::vector<std::size_t> counts(3);
  for (auto f : plan.fold) ++counts[f];
  EXPECT_LE(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()), 1u);

  std::vector<std::size_t> perm(s.data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto shuffled = s.data.subset(perm);
  const auto plan2 = assign_folds(shuffled, 3, 42);
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(plan2.fold[i], plan.fold[perm[i]]);
}

TEST(CrossFit, CoversOracleAndDeltaIsNarrower) {
  const auto s = msm_sample(20000, 11);
  const auto rep = cross_fit_regret(s.data, {Utility::accuracy()}, Msm{1.4}, no_bootstrap());
  const auto& r = rep.result("accuracy");
  EXPECT_TRUE(r.delta.contains(oracle_regret(s, Utility::accuracy())));
  EXPECT_LT(r.delta.width(), r.baseline.width());
}

TEST(CrossFit, FoldAverageMatchesReportAndNests) {
  const auto s = msm_sample(4000, 12);
  const auto all = standard_measures();
  const std::vector<PerformanceMeasure> ms(all.begin(), all.end());
  const auto rep = cross_fit_regret(s.data, ms, Msm{1.4}, no_bootstrap());
  ASSERT_EQ(rep.folds.size(), 2u);
  for (std::size_t k = 0; k < ms.size(); ++k) {
    double lo = 0.0, hi = 0.0;
    for (const auto& f : rep.folds) {
      lo += f.delta[k].lower / 2.0;
      hi += f.delta[k].upper / 2.0;
      if (!std::holds_alternative<PredictiveValue>(ms[k]) || std::get<PredictiveValue>(ms[k]).a() == 0) {
        EXPECT_LE(f.baseline[k].lower, f.delta[k].lower + 1e-9);
        EXPECT_GE(f.baseline[k].upper, f.delta[k].upper - 1e-9);
      } else {
        EXPECT_NEAR(f.baseline[k].lower, f.delta[k].lower, 1e-9);
        EXPECT_NEAR(f.baseline[k].upper, f.delta[k].upper, 1e-9);
      }
    }
    EXPECT_NEAR(rep.results[k].delta.lower(), lo, 1e-12);
    EXPECT_NEAR(rep.results[k].delta.upper(), hi, 1e-12);
    EXPECT_LE(rep.results[k].baseline.lower(), rep.results[k].delta.lower() + 1e-9);
    EXPECT_GE(rep.results[k].baseline.upper(), rep.results[k].delta.upper() - 1e-9);
  }
}

TEST(CrossFit, FoldCountStability) {
  const auto s = msm_sample(20000, 13);
  auto run = [&](std::size_t k) {
    auto c = no_bootstrap();
    c.k_folds = k;
    return cross_fit_regret(s.data, {Utility::accuracy()}, Msm{1.4}, c);
  };
  const auto a = run(2), b = run(4);
  auto se = [](const RegretReport& r, bool upper) {
    std::vector<double> v;
    for (const auto& f : r.folds) v.push_back(upper ? f.delta[0].upper : f.delta[0].lower);
    return sd(v) / std::sqrt(static_cast<double>(v.size()));
  };
  const double se_lo = std::max(se(a, false), se(b, false));
  const double se_hi = std::max(se(a, true), se(b, true));
  EXPECT_LT(std::abs(a.results[0].delta.lower() - b.results[0].delta.lower()), 2.0 * se_lo);
  EXPECT_LT(std::abs(a.results[0].delta.upper() - b.results[0].delta.upper()), 2.0 * se_hi);
}

TEST(CrossFit, FullySelectedDataCollapsesToPointRegret) {
  std::vector<Row> rows;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 400; ++i) {
    const double x = n01(rng);
    rows.push_back({{x, n01(rng)}, 1, x > 0 ? 1.0 : 0.0, n01(rng) + x > 0 ? 1 : 0});
  }
  const auto data = make_dataset(rows);
  const auto rep = cross_fit_regret(data, {Utility::accuracy(), ClassPerf(1)}, Msm{2.0}, no_bootstrap());
  for (const auto& r : rep.results) {
    // Endpoints are fold averages of the per-fold point regret.
    double point = 0.0;
    for (const auto& f : rep.folds) {
      EXPECT_EQ(f.set.h10.width(), 0.0);
      EXPECT_EQ(f.set.h00.width(), 0.0);
      point += delta_value(complete_table(f.set.identified, 0.0, 0.0), r.measure);
    }
    point /= static_cast<double>(rep.folds.size());
    EXPECT_NEAR(r.delta.lower(), point, 1e-12);
    EXPECT_NEAR(r.delta.upper(), point, 1e-12);
    EXPECT_NEAR(r.baseline.lower(), point, 1e-12);
    EXPECT_NEAR(r.baseline.upper(), point, 1e-12);
  }
}

TEST(CrossFit, InvariantToRowPermutation) {
  const auto s = msm_sample(3000, 14);
  std::vector<std::size_t> perm(s.data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::reverse(perm.begin(), perm.end());
  const auto a = cross_fit_regret(s.data, {ClassPerf(0)}, Msm{1.3}, no_bootstrap());
  const auto b = cross_fit_regret(s.data.subset(perm), {ClassPerf(0)}, Msm{1.3}, no_bootstrap());
  EXPECT_NEAR(a.results[0].delta.lower(), b.results[0].delta.lower(), 1e-12);
  EXPECT_NEAR(a.results[0].delta.upper(), b.results[0].delta.upper(), 1e-12);
}

TEST(CrossFit, TooFewRowsForFolds) {
  std::vector<Row> rows(3, Row{{0.0}, 1, 1.0, 1});
  EXPECT_THROW(cross_fit_regret(make_dataset(rows), {Utility::accuracy()}, Msm{1.2}, no_bootstrap()), DataError);
}

TEST(CrossFit, EndpointSpreadShrinksWithSampleSize) {
  std::vector<double> spread;
  for (std::size_t n : {2000u, 8000u, 32000u}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto s = msm_sample(n, 100 + seed, 21);
      const auto rep = cross_fit_regret(s.data, {Utility::accuracy()}, Msm{1.4}, no_bootstrap(seed));
      total += std::abs(rep.folds[0].delta[0].upper - rep.folds[1].delta[0].upper);
    }
    spread.push_back(total / 10.0);
  }
  EXPECT_GT(spread[0], spread[1]);
  EXPECT_GT(spread[1], spread[2]);
}

TEST(DoublyRobust, SingleRowInfluenceCorrection) {
  // d = 1, y = 1, pi1 = 0.5, e1 = 0.8, mu1 = 0.6, upper side with lambda = 1.2:
  // pi * e0 * g'(mu) * (y - mu) / e1 = 0.5 * 0.2 * 1.2 * 0.4 / 0.8.
  const auto data = make_dataset({Row{{0.0}, 1, 0.5, 1}});
  const double v = dr_vstat_bound(data, 1.2, ConstantModel(0.8), ConstantModel(0.6), 1, Side::upper, 1.0);
  EXPECT_NEAR(v, 0.06, 1e-15);
  const double lo = dr_vstat_bound(data, 1.2, ConstantModel(0.8), ConstantModel(0.6), 1, Side::lower, 1.0);
  EXPECT_NEAR(lo, 0.5 * 0.2 * (0.4 / 1.2) / 0.8, 1e-15);
}

TEST(DoublyRobust, UnselectedRowUsesBoundingFunction) {
  const auto data = make_dataset({Row{{0.0}, 0, 0.5, -1}});
  EXPECT_NEAR(dr_vstat_bound(data, 1.2, ConstantModel(0.8), ConstantModel(0.6), 1, Side::upper, 1.0), 0.36, 1e-15);
  EXPECT_NEAR(dr_vstat_bound(data, 1.2, ConstantModel(0.8), ConstantModel(0.9), 1, Side::upper, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(dr_vstat_bound(data, 1.2, ConstantModel(0.8), ConstantModel(0.6), 1, Side::upper, 0.2), 0.2, 1e-15);
}

TEST(DoublyRobust, AgreesWithPluginAtTrueNuisances) {
  WorldConfig wc;
  wc.seed = 31;
  const SyntheticWorld world(wc);
  const auto truth = world.truth();
  const auto s = world.generate(100000, 2);
  const auto tau = bounding_functions(Msm{1.4}, truth.models);
  const auto id = estimate_identified(s.data);
  for (int t = 0; t < 2; ++t) {
    const Interval plug = plugin_vstat_bound(s.data, tau, *truth.models.e1, t, id.rho[t][0]);
    const double up =
        dr_vstat_bound(s.data, 1.4, *truth.models.e1, *truth.models.mu1, t, Side::upper, id.rho[t][0]);
    const double lo =
        dr_vstat_bound(s.data, 1.4, *truth.models.e1, *truth.models.mu1, t, Side::lower, id.rho[t][0]);
    EXPECT_NEAR(up, plug.upper, 0.01);
    EXPECT_NEAR(lo, plug.lower, 0.01);
  }
}

TEST(DoublyRobust, CrossFitProducesNestedIntervals) {
  const auto s = msm_sample(8000, 15);
  auto c = no_bootstrap();
  c.estimator = Estimator::doubly_robust;
  const auto dr = cross_fit_regret(s.data, {Utility::accuracy()}, Msm{1.4}, c);
  const auto pl = cross_fit_regret(s.data, {Utility::accuracy()}, Msm{1.4}, no_bootstrap());
  EXPECT_LE(dr.results[0].baseline.lower(), dr.results[0].delta.lower() + 1e-9);
  EXPECT_NEAR(dr.results[0].delta.lower(), pl.results[0].delta.lower(), 0.03);
  EXPECT_NEAR(dr.results[0].delta.upper(), pl.results[0].delta.upper(), 0.03);
}

TEST(Bootstrap, SingleReplicateIsDegenerate) {
  const auto s = msm_sample(1000, 16);
  auto c = no_bootstrap();
  c.bootstrap_b = 1;
  const auto b = bootstrap_ci(s.data, {Utility::accuracy()}, Msm{1.4}, c);
  EXPECT_EQ(b.delta[0].lower.lower, b.delta[0].lower.upper);
  EXPECT_EQ(b.delta[0].upper.lower, b.delta[0].upper.upper);
  EXPECT_EQ(b.summary.replicates, 1u);
}

TEST(Bootstrap, DeterministicAndIndependentOfJobs) {
  const auto s = msm_sample(1500, 17);
  auto c = no_bootstrap(9);
  c.bootstrap_b = 12;
  const auto a = bootstrap_ci(s.data, {ClassPerf(1)}, Msm{1.4}, c);
  c.jobs = 3;
  const auto b = bootstrap_ci(s.data, {ClassPerf(1)}, Msm{1.4}, c);
  EXPECT_EQ(a.delta[0].lower, b.delta[0].lower);
  EXPECT_EQ(a.delta[0].upper, b.delta[0].upper);
  EXPECT_EQ(a.baseline[0].upper, b.baseline[0].upper);
}

TEST(Bootstrap, HalfWidthSmallAtDeskScale) {
  const auto s = msm_sample(20000, 18);
  auto c = no_bootstrap(4);
  c.bootstrap_b = 200;
  const auto rep = estimate_regret(s.data, {Utility::accuracy()}, Msm{1.4}, c);
  const auto& d = rep.results[0].delta;
  ASSERT_TRUE(d.ci_lower() && d.ci_upper());
  const auto& ci = *rep.results[0].delta_ci;
  EXPECT_LT(ci.lower.width() / 2.0, 0.05);
  EXPECT_LT(ci.upper.width() / 2.0, 0.05);
  EXPECT_LE(*d.ci_lower(), *d.ci_upper());
}

TEST(Subgroups, SmallGroupSkippedAndHomogeneousGroupsCoverPooledOracle) {
  const auto s = msm_sample(12010, 19);
  std::vector<std::string> g(s.data.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = i < 10 ? "tiny" : (i % 2 ? "a" : "b");
  const auto data = with_groups(s.data, g);
  const auto rep = subgroup_report(data, {Utility::accuracy()}, Msm{1.4}, no_bootstrap());
  ASSERT_EQ(rep.groups.size(), 3u);
  const double oracle = oracle_regret(s, Utility::accuracy());
  for (const auto& e : rep.groups) {
    if (e.name == "tiny") {
      EXPECT_EQ(e.report, nullptr);
      EXPECT_NE(e.skipped_reason.find("below minimum"), std::string::npos);
    } else {
      ASSERT_NE(e.report, nullptr);
      EXPECT_TRUE(e.report->results[0].delta.contains(oracle, 0.01)) << e.name;
    }
  }
}

TEST(Subgroups, LowerSelectionRateGivesWiderInterval) {
  // Two groups with the same covariates, policy and outcome law; only the
  // status-quo selection rate differs.
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u;
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<Row> rows;
  std::vector<std::string> g;
  for (int i = 0; i < 40000; ++i) {
    const bool high = i % 2 == 0;
    const double x = n01(rng);
    const int d = u(rng) < (high ? 0.7 : 0.3) ? 1 : 0;
    const int y = u(rng) < sigmoid(x) ? 1 : 0;
    rows.push_back({{x}, d, sigmoid(0.5 * x), d == 1 ? y : -1});
    g.push_back(high ? "high" : "low");
  }
  const auto rep = subgroup_report(with_groups(make_dataset(rows), g), {Utility::accuracy()}, Msm{1.4},
                                   no_bootstrap());
  ASSERT_EQ(rep.groups.size(), 2u);
  double width_high = 0.0, width_low = 0.0;
  for (const auto& e : rep.groups) {
    ASSERT_NE(e.report, nullptr);
    (e.name == "high" ? width_high : width_low) = e.report->results[0].delta.width();
  }
  EXPECT_GT(width_low, width_high);
}
