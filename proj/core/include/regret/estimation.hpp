#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regret/assumptions.hpp"
#include "regret/bounds.hpp"
#include "regret/causal_assumption.hpp"
#include "regret/dataset.hpp"
#include "regret/nuisance.hpp"
#include "regret/types.hpp"

namespace regret {

enum class Estimator { plugin, doubly_robust };

Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);

struct EstimationConfig {
  std::size_t k_folds = 2;
  Estimator estimator = Estimator::plugin;
  std::size_t bootstrap_b = 200;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t min_group_size = 50;
  ClassifierConfig classifier;

  /// Throws ConfigError on out-of-range fields or a doubly robust request
  /// under a non-MSM assumption.
  void validate(const CausalAssumption& assumption) const;
};

/// Cross-fitting order: rows ranked by a seeded hash of their content, so
/// the assignment does not depend on row order in the input.
struct FoldPlan {
  std::vector<std::size_t> order;  // canonical row order
  std::vector<std::size_t> fold;   // fold index per input row
  std::size_t k = 0;

  std::vector<std::size_t> rows_in(std::size_t k) const;
  std::vector<std::size_t> rows_outside(std::size_t k) const;
};

FoldPlan assign_folds(const ObservationalDataset& data, std::size_t k_folds, std::uint64_t seed);

/// Percentile confidence band for one interval endpoint.
struct EndpointCI {
  Interval lower;  // CI around the lower endpoint
  Interval upper;  // CI around the upper endpoint
};

struct MeasureResult {
  PerformanceMeasure measure;
  RegretInterval delta;
  RegretInterval baseline;
  std::optional<EndpointCI> delta_ci;
  std::optional<EndpointCI> baseline_ci;
};

struct FoldDiagnostics {
  std::size_t fold = 0;
  std::size_t rows = 0;
  UncertaintySet set;
  TauDiagnostics tau;
  std::vector<std::string> warnings;
  std::vector<Interval> delta;     // per measure
  std::vector<Interval> baseline;  // per measure
};

struct RegretReport;

struct GroupEntry {
  std::string name;
  std::size_t size = 0;
  std::shared_ptr<RegretReport> report;  // null when skipped
  std::string skipped_reason;
};

struct BootstrapSummary {
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
};

struct RegretReport {
  std::string assumption;
  Estimator estimator = Estimator::plugin;
  std::size_t n = 0;
  std::size_t k_folds = 0;
  std::uint64_t seed = 0;
  std::vector<MeasureResult> results;  // in requested measure order
  std::vector<FoldDiagnostics> folds;
  Interval h10;  // fold-averaged
  Interval h00;
  std::optional<BootstrapSummary> bootstrap;
  std::vector<GroupEntry> groups;
  std::vector<std::string> warnings;

  const MeasureResult& result(const std::string& measure_name) const;
};

/// Cross-fitted estimate of delta and baseline intervals for each measure.
/// Does not bootstrap.
RegretReport cross_fit_regret(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                              const CausalAssumption& assumption, const EstimationConfig& config);

/// Influence-function corrected estimate of E[pi_t(X) (1 - D) g(mu1(X))]
/// with g(m) = min(1, lambda m) (upper) or m / lambda (lower), clamped into
/// [0, rho_t0].
enum class Side { lower, upper };
double dr_vstat_bound(const ObservationalDataset& fold, double lambda, const ProbabilityModel& e1_model,
                      const ProbabilityModel& mu1_model, int t, Side side, double rho_t0);

/// Percentile CIs for each endpoint from row-resampled replicates of the
/// full cross-fit. Throws NumericError if more than 10% of replicates fail.
struct BootstrapResult {
  std::vector<EndpointCI> delta;     // per measure
  std::vector<EndpointCI> baseline;  // per measure
  BootstrapSummary summary;
};

BootstrapResult bootstrap_ci(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config);

/// Cross-fit plus bootstrap CIs (when bootstrap_b > 0).
RegretReport estimate_regret(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config);

/// Pooled estimate plus independent estimates per group. Groups smaller
/// than config.min_group_size, or whose estimation fails, are listed as
/// skipped with a reason.
RegretReport subgroup_report(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config);

}  // namespace regret
