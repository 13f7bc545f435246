#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "regret/estimation.hpp"
#include "regret/report.hpp"
#include "regret/synthetic.hpp"

namespace regret {

struct ExperimentConfig {
  std::size_t trials = 100;
  std::size_t n = 20000;  // sample size for sweeps and design sensitivity
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  EstimationConfig estimation;  // bootstrap is not used by the drivers
  std::vector<PerformanceMeasure> measures{Utility::accuracy()};

  void validate() const;
};

/// One estimated interval checked against the trial's oracle regret.
struct TrialRow {
  double grid_value = 0.0;  // n for coverage, knob value for sweeps
  std::size_t trial = 0;
  std::string measure;
  Method method = Method::delta;
  bool failed = false;
  std::string error;
  double lower = 0.0;
  double upper = 0.0;
  double oracle = 0.0;
  bool covered = false;
};

struct GridSummary {
  double grid_value = 0.0;
  std::string measure;
  Method method = Method::delta;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double coverage = 0.0;
  double mean_lower = 0.0;
  double mean_upper = 0.0;
  double mean_width = 0.0;
};

struct TrialTable {
  std::vector<TrialRow> rows;
  std::vector<GridSummary> summary;

  const GridSummary& at(double grid_value, const std::string& measure, Method method) const;
};

/// Coverage of the oracle regret as a function of sample size. Failed
/// trials count as uncovered; more than 10% at one n aborts. Trial i
/// uses a freshly drawn world (weights resampled) shared across the grid.
TrialTable coverage_experiment(const WorldConfig& world, const std::vector<std::size_t>& n_grid,
                               const CausalAssumption& assumption, const ExperimentConfig& config);

enum class SweepKnob { lambda_star, beta0, beta1 };
SweepKnob parse_sweep_knob(const std::string& name);
std::string to_string(SweepKnob k);

/// Coverage and width while one data-generating knob varies. lambda_star
/// fixes Lambda* at the grid value on every row. A violated assumption can
/// make a fit fail (e.g. IV bounds crossing); such trials are kept as
/// uncovered failures instead of aborting the sweep.
TrialTable violation_sweep(const WorldConfig& world, SweepKnob knob, const std::vector<double>& grid,
                           const CausalAssumption& assumption, const ExperimentConfig& config);

/// Smallest grid Lambda at which each interval contains zero; +inf when no
/// grid value does.
struct SensitivityRow {
  std::size_t world = 0;
  std::string measure;
  double lambda0_delta = std::numeric_limits<double>::infinity();
  double lambda0_baseline = std::numeric_limits<double>::infinity();
  bool failed = false;
  std::string error;
};

std::vector<SensitivityRow> design_sensitivity(const WorldConfig& world, const std::vector<double>& lambda_grid,
                                               const ExperimentConfig& config);

/// A random valid v-statistic table with random sub-intervals around its
/// unidentified entries.
UncertaintySet random_uncertainty_set(std::mt19937_64& rng);

struct SeparationRow {
  std::size_t fixture = 0;
  std::string measure;
  double alpha = 0.0;
  double bound = 0.0;
  double improvement = 0.0;  // baseline width - delta width
};

/// Width gap versus its lower bound on random fixtures for the five standard
/// measures.
std::vector<SeparationRow> separation_characterization(std::size_t n_fixtures, std::uint64_t seed);

std::string trial_table_csv(const TrialTable& t, const std::string& grid_name);
std::string summary_csv(const TrialTable& t, const std::string& grid_name);
json to_json(const TrialTable& t, const std::string& grid_name);
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);
json to_json(const std::vector<SensitivityRow>& rows);
std::string separation_csv(const std::vector<SeparationRow>& rows);
json to_json(const std::vector<SeparationRow>& rows);

}  // namespace regret
