#include "regret/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "regret/parallel.hpp"

namespace regret {

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (n < 4) throw ConfigError("n must be >= 4");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (measures.empty()) throw ConfigError("measure list is empty");
}

const GridSummary& TrialTable::at(double grid_value, const std::string& measure, Method method) const {
  for (const auto& s : summary) {
    if (s.grid_value == grid_value && s.measure == measure && s.method == method) return s;
  }
  throw ConfigError("no summary for grid value " + format_double(grid_value) + ", measure " + measure);
}

SweepKnob parse_sweep_knob(const std::string& name) {
  if (name == "lambda_star") return SweepKnob::lambda_star;
  if (name == "beta0") return SweepKnob::beta0;
  if (name == "beta1") return SweepKnob::beta1;
  throw ConfigError("unknown sweep knob '" + name + "'");
}

std::string to_string(SweepKnob k) {
  switch (k) {
    case SweepKnob::lambda_star:
      return "lambda_star";
    case SweepKnob::beta0:
      return "beta0";
    case SweepKnob::beta1:
    default:
      return "beta1";
  }
}

namespace {

struct Unit {
  WorldConfig world;
  std::size_t n = 0;
  std::uint64_t sample_seed = 0;
  double grid_value = 0.0;
  std::size_t trial = 0;
};

std::vector<TrialRow> run_unit(const Unit& u, const CausalAssumption& assumption, const ExperimentConfig& config) {
  std::vector<TrialRow> rows;
  auto base_row = [&](const PerformanceMeasure& m, Method method) {
    TrialRow r;
    r.grid_value = u.grid_value;
    r.trial = u.trial;
    r.measure = measure_name(m);
    r.method = method;
    return r;
  };
  try {
    const SyntheticWorld world(u.world);
    const OracleSample sample = world.generate(u.n, u.sample_seed);
    EstimationConfig est = config.estimation;
    est.seed = derive_seed(u.sample_seed, 1);
    est.bootstrap_b = 0;
    est.jobs = 1;
    const RegretReport rep = cross_fit_regret(sample.data, config.measures, assumption, est);
    for (const auto& res : rep.results) {
      const double oracle = oracle_regret(sample, res.measure);
      for (const RegretInterval* iv : {&res.delta, &res.baseline}) {
        TrialRow r = base_row(res.measure, iv->method());
        r.lower = iv->lower();
        r.upper = iv->upper();
        r.oracle = oracle;
        r.covered = iv->contains(oracle);
        rows.push_back(std::move(r));
      }
    }
  } catch (const Error& e) {
    rows.clear();
    for (const auto& m : config.measures) {
      for (Method method : {Method::delta, Method::baseline}) {
        TrialRow r = base_row(m, method);
        r.failed = true;
        r.error = e.what();
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

// Failed trials count as not covered. With failures_fatal, more than 10%
// failures at any grid value aborts.
TrialTable run_units(const std::vector<Unit>& units, const std::vector<double>& grid,
                     const CausalAssumption& assumption, const ExperimentConfig& config, bool failures_fatal) {
  std::vector<std::vector<TrialRow>> results(units.size());
  parallel_for(units.size(), config.jobs,
               [&](std::size_t i) { results[i] = run_unit(units[i], assumption, config); });

  TrialTable table;
  for (auto& r : results) table.rows.insert(table.rows.end(), r.begin(), r.end());

  for (double g : grid) {
    for (const auto& m : config.measures) {
      const std::string name = measure_name(m);
      for (Method method : {Method::delta, Method::baseline}) {
        GridSummary s;
        s.grid_value = g;
        s.measure = name;
        s.method = method;
        std::size_t ok = 0, covered = 0;
        for (const auto& r : table.rows) {
          if (r.grid_value != g || r.measure != name || r.method != method) continue;
          ++s.trials;
          if (r.failed) {
            ++s.failures;
            continue;
          }
          ++ok;
          covered += r.covered;
          s.mean_lower += r.lower;
          s.mean_upper += r.upper;
        }
        if (failures_fatal && static_cast<double>(s.failures) > 0.1 * static_cast<double>(s.trials)) {
          std::string first;
          for (const auto& r : table.rows)
            if (r.failed && r.grid_value == g) {
              first = r.error;
              break;
            }
          throw NumericError(std::to_string(s.failures) + " of " + std::to_string(s.trials) +
                             " trials failed at grid value " + format_double(g) + ": " + first);
        }
        if (s.trials > 0) s.coverage = static_cast<double>(covered) / static_cast<double>(s.trials);
        if (ok > 0) {
          const double k = static_cast<double>(ok);
          s.mean_lower /= k;
          s.mean_upper /= k;
          s.mean_width = s.mean_upper - s.mean_lower;
        }
        table.summary.push_back(s);
      }
    }
  }
  return table;
}

}  // namespace

TrialTable coverage_experiment(const WorldConfig& world, const std::vector<std::size_t>& n_grid,
                               const CausalAssumption& assumption, const ExperimentConfig& config) {
  config.validate();
  if (n_grid.empty()) throw ConfigError("sample-size grid is empty");
  std::vector<Unit> units;
  std::vector<double> grid;
  for (std::size_t n : n_grid) grid.push_back(static_cast<double>(n));
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    WorldConfig wc = world;
    wc.seed = derive_seed(config.seed, trial);
    for (std::size_t n : n_grid) {
      units.push_back(Unit{wc, n, derive_seed(wc.seed, 0x10000 + n), static_cast<double>(n), trial});
    }
  }
  return run_units(units, grid, assumption, config, true);
}

TrialTable violation_sweep(const WorldConfig& world, SweepKnob knob, const std::vector<double>& grid,
                           const CausalAssumption& assumption, const ExperimentConfig& config) {
  config.validate();
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  std::vector<Unit> units;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t world_seed = derive_seed(config.seed, trial);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      WorldConfig wc = world;
      wc.seed = world_seed;
      switch (knob) {
        case SweepKnob::lambda_star:
          if (!(grid[g] > 0.0)) throw ConfigError("lambda_star grid values must be positive");
          wc.lambda_star_range = Interval{grid[g], grid[g]};
          break;
        case SweepKnob::beta0:
          wc.beta0 = grid[g];
          break;
        case SweepKnob::beta1:
          wc.beta1 = grid[g];
          break;
      }
      units.push_back(Unit{wc, config.n, derive_seed(world_seed, 0x20000 + g), grid[g], trial});
    }
  }
  return run_units(units, grid, assumption, config, false);
}

std::vector<SensitivityRow> design_sensitivity(const WorldConfig& world, const std::vector<double>& lambda_grid,
                                               const ExperimentConfig& config) {
  config.validate();
  if (lambda_grid.empty()) throw ConfigError("lambda grid is empty");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()) || lambda_grid.front() < 1.0) {
    throw ConfigError("lambda grid must be sorted ascending and start at >= 1");
  }
  const std::size_t nm = config.measures.size();
  std::vector<std::vector<SensitivityRow>> per_world(config.trials);

  parallel_for(config.trials, config.jobs, [&](std::size_t w) {
    WorldConfig wc = world;
    wc.seed = derive_seed(config.seed, w);
    std::vector<SensitivityRow> rows(nm);
    for (std::size_t j = 0; j < nm; ++j) {
      rows[j].world = w;
      rows[j].measure = measure_name(config.measures[j]);
    }
    try {
      const SyntheticWorld sw(wc);
      const OracleSample sample = sw.generate(config.n, derive_seed(wc.seed, 0x30000));
      EstimationConfig est = config.estimation;
      est.seed = derive_seed(wc.seed, 0x30001);
      est.bootstrap_b = 0;
      est.jobs = 1;
      for (double lambda : lambda_grid) {
        const RegretReport rep = cross_fit_regret(sample.data, config.measures, Msm{lambda}, est);
        bool done = true;
        for (std::size_t j = 0; j < nm; ++j) {
          const auto& r = rep.results[j];
          if (std::isinf(rows[j].lambda0_delta) && r.delta.contains(0.0)) rows[j].lambda0_delta = lambda;
          if (std::isinf(rows[j].lambda0_baseline) && r.baseline.contains(0.0)) rows[j].lambda0_baseline = lambda;
          done = done && !std::isinf(rows[j].lambda0_delta) && !std::isinf(rows[j].lambda0_baseline);
        }
        if (done) break;
      }
    } catch (const Error& e) {
      for (auto& r : rows) {
        r.failed = true;
        r.error = e.what();
      }
    }
    per_world[w] = std::move(rows);
  });

  std::vector<SensitivityRow> out;
  for (auto& rows : per_world) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

UncertaintySet random_uncertainty_set(std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VStatTable v;
  double total = 0.0;
  std::array<double, 8> g{};
  for (double& c : g) {
    c = expo(rng);
    total += c;
  }
  int k = 0;
  for (int y = 0; y < 2; ++y)
    for (int t = 0; t < 2; ++t)
      for (int d = 0; d < 2; ++d) v.set(y, t, d, g[static_cast<std::size_t>(k++)] / total);

  UncertaintySet s;
  for (int y = 0; y < 2; ++y)
    for (int t = 0; t < 2; ++t) s.identified.v1[y][t] = v.v(y, t, 1);
  for (int t = 0; t < 2; ++t)
    for (int d = 0; d < 2; ++d) s.identified.rho[t][d] = v.rho(t, d);
  auto sub = [&](double rho) {
    double a = unif(rng) * rho, b = unif(rng) * rho;
    if (a > b) std::swap(a, b);
    return Interval{a, b};
  };
  s.h10 = sub(s.rho10());
  s.h00 = sub(s.rho00());
  return s;
}

std::vector<SeparationRow> separation_characterization(std::size_t n_fixtures, std::uint64_t seed) {
  if (n_fixtures < 1) throw ConfigError("n_fixtures must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<SeparationRow> rows;
  const auto measures = standard_measures();
  for (std::size_t f = 0; f < n_fixtures; ++f) {
    const UncertaintySet s = random_uncertainty_set(rng);
    for (const auto& m : measures) {
      SeparationRow r;
      r.fixture = f;
      r.measure = measure_name(m);
      r.alpha = s.h00.width();
      r.bound = separation_bound(s, m);
      r.improvement = baseline_interval(s, m).width() - delta_interval(s, m).width();
      rows.push_back(r);
    }
  }
  return rows;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

json num_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

}  // namespace

std::string trial_table_csv(const TrialTable& t, const std::string& grid_name) {
  std::ostringstream out;
  out << grid_name << ",trial,measure,method,failed,lower,upper,oracle,covered\n";
  for (const auto& r : t.rows) {
    out << num(r.grid_value) << ',' << r.trial << ',' << r.measure << ',' << to_string(r.method) << ','
        << (r.failed ? 1 : 0) << ',' << num(r.lower) << ',' << num(r.upper) << ',' << num(r.oracle) << ','
        << (r.covered ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string summary_csv(const TrialTable& t, const std::string& grid_name) {
  std::ostringstream out;
  out << grid_name << ",measure,method,trials,failures,coverage,mean_lower,mean_upper,mean_width\n";
  for (const auto& s : t.summary) {
    out << num(s.grid_value) << ',' << s.measure << ',' << to_string(s.method) << ',' << s.trials << ','
        << s.failures << ',' << num(s.coverage) << ',' << num(s.mean_lower) << ',' << num(s.mean_upper) << ','
        << num(s.mean_width) << '\n';
  }
  return out.str();
}

json to_json(const TrialTable& t, const std::string& grid_name) {
  json summary = json::array();
  for (const auto& s : t.summary) {
    summary.push_back(json{{grid_name, s.grid_value},
                           {"measure", s.measure},
                           {"method", to_string(s.method)},
                           {"trials", s.trials},
                           {"failures", s.failures},
                           {"coverage", s.coverage},
                           {"mean_lower", s.mean_lower},
                           {"mean_upper", s.mean_upper},
                           {"mean_width", s.mean_width}});
  }
  std::vector<std::string> errors;
  for (const auto& r : t.rows)
    if (r.failed && errors.size() < 10) errors.push_back(r.error);
  return json{{"summary", std::move(summary)}, {"errors", errors}};
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::ostringstream out;
  out << "world,measure,lambda0_delta,lambda0_baseline,failed\n";
  for (const auto& r : rows) {
    out << r.world << ',' << r.measure << ',' << num(r.lambda0_delta) << ',' << num(r.lambda0_baseline) << ','
        << (r.failed ? 1 : 0) << '\n';
  }
  return out.str();
}

json to_json(const std::vector<SensitivityRow>& rows) {
  json arr = json::array();
  std::size_t nested = 0, strict = 0, failed = 0;
  for (const auto& r : rows) {
    if (r.failed) {
      ++failed;
      continue;
    }
    nested += r.lambda0_delta >= r.lambda0_baseline;
    strict += r.lambda0_delta > r.lambda0_baseline;
    arr.push_back(json{{"world", r.world},
                       {"measure", r.measure},
                       {"lambda0_delta", num_json(r.lambda0_delta)},
                       {"lambda0_baseline", num_json(r.lambda0_baseline)}});
  }
  return json{{"rows", std::move(arr)}, {"nested", nested}, {"strict", strict}, {"failed", failed}};
}

std::string separation_csv(const std::vector<SeparationRow>& rows) {
  std::ostringstream out;
  out << "fixture,measure,alpha,bound,improvement\n";
  for (const auto& r : rows) {
    out << r.fixture << ',' << r.measure << ',' << num(r.alpha) << ',' << num(r.bound) << ',' << num(r.improvement)
        << '\n';
  }
  return out.str();
}

json to_json(const std::vector<SeparationRow>& rows) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) min_gap = std::min(min_gap, r.improvement - r.bound);
  return json{{"fixtures", rows.empty() ? 0 : rows.back().fixture + 1},
              {"rows", rows.size()},
              {"min_improvement_minus_bound", num_json(min_gap)}};
}

}  // namespace regret
