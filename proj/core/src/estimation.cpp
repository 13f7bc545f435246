#include "regret/estimation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "regret/parallel.hpp"

namespace regret {

Estimator parse_estimator(const std::string& name) {
  if (name == "plugin") return Estimator::plugin;
  if (name == "doubly_robust" || name == "dr") return Estimator::doubly_robust;
  throw ConfigError("unknown estimator '" + name + "'");
}

std::string to_string(Estimator e) { return e == Estimator::plugin ? "plugin" : "doubly_robust"; }

void EstimationConfig::validate(const CausalAssumption& assumption) const {
  if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (estimator == Estimator::doubly_robust && !is_msm_family(assumption)) {
    throw ConfigError("the doubly robust estimator is only available for msm and rosenbaum assumptions");
  }
}

const MeasureResult& RegretReport::result(const std::string& name) const {
  for (const auto& r : results) {
    if (measure_name(r.measure) == name) return r;
  }
  throw ConfigError("measure '" + name + "' not in report");
}

namespace {

[[noreturn]] void rethrow_in_context(const Error& e, const std::string& context) {
  const std::string msg = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::config:
      throw ConfigError(msg);
    case ErrorKind::data:
      throw DataError(msg);
    case ErrorKind::numeric:
    default:
      throw NumericError(msg);
  }
}

std::uint64_t mix(std::uint64_t h, std::uint64_t word) {
  std::uint64_t s = h ^ word;
  return splitmix64(s);
}

std::uint64_t row_hash(const ObservationalDataset& data, std::size_t i, std::uint64_t seed) {
  std::uint64_t h = mix(seed, 0x5851F42D4C957F2DULL);
  for (double v : data.x(i)) h = mix(h, std::bit_cast<std::uint64_t>(v));
  h = mix(h, static_cast<std::uint64_t>(data.d(i)));
  h = mix(h, std::bit_cast<std::uint64_t>(data.pi1(i)));
  if (data.has_t()) h = mix(h, static_cast<std::uint64_t>(data.t(i)));
  h = mix(h, static_cast<std::uint64_t>(data.y(i) + 2));
  if (data.has_z()) h = mix(h, static_cast<std::uint64_t>(data.z(i)));
  if (data.has_w()) h = mix(h, static_cast<std::uint64_t>(data.w(i)));
  if (data.has_group()) {
    for (char c : data.group(i)) h = mix(h, static_cast<unsigned char>(c));
  }
  return h;
}

/// Strict weak order on row content, used to break hash ties.
bool content_less(const ObservationalDataset& data, std::size_t a, std::size_t b) {
  const auto xa = data.x(a);
  const auto xb = data.x(b);
  if (!std::equal(xa.begin(), xa.end(), xb.begin(), xb.end())) {
    return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
  }
  auto key = [&](std::size_t i) {
    return std::make_tuple(data.d(i), data.pi1(i), data.has_t() ? data.t(i) : 0, data.y(i),
                           data.has_z() ? data.z(i) : 0, data.has_w() ? data.w(i) : 0);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  if (data.has_group()) return data.group(a) < data.group(b);
  return false;
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001B3ULL;
  return h;
}

}  // namespace

std::vector<std::size_t> FoldPlan::rows_in(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t i : order)
    if (fold[i] == k) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::rows_outside(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t i : order)
    if (fold[i] != k) out.push_back(i);
  return out;
}

FoldPlan assign_folds(const ObservationalDataset& data, std::size_t k_folds, std::uint64_t seed) {
  if (k_folds < 1) throw ConfigError("k_folds must be >= 1");
  const std::size_t n = data.size();
  std::vector<std::uint64_t> hashes(n);
  for (std::size_t i = 0; i < n; ++i) hashes[i] = row_hash(data, i, seed);
  FoldPlan plan;
  plan.k = k_folds;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    return content_less(data, a, b);
  });
  plan.fold.resize(n);
  for (std::size_t r = 0; r < n; ++r) plan.fold[plan.order[r]] = r % k_folds;
  return plan;
}

double dr_vstat_bound(const ObservationalDataset& fold, double lambda, const ProbabilityModel& e1_model,
                      const ProbabilityModel& mu1_model, int t, Side side, double rho_t0) {
  if (fold.size() == 0) throw DataError("empty fold");
  if (!(lambda >= 1.0)) throw ConfigError("lambda must be >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    const auto x = fold.x(i);
    const double pi = fold.pi(i, t);
    if (pi == 0.0) continue;
    const double m = mu1_model.predict(x);
    double g = 0.0, dg = 0.0;
    if (side == Side::upper) {
      g = std::min(1.0, lambda * m);
      dg = lambda * m < 1.0 ? lambda : 0.0;
    } else {
      g = m / lambda;
      dg = 1.0 / lambda;
    }
    double phi = 0.0;
    if (fold.d(i) == 0) {
      phi = g;
    } else if (dg != 0.0) {
      const double e1 = e1_model.predict(x);
      phi = (1.0 - e1) * dg * (fold.y(i) - m) / e1;
    }
    sum += pi * phi;
  }
  return std::clamp(sum / static_cast<double>(fold.size()), 0.0, std::max(rho_t0, 0.0));
}

RegretReport cross_fit_regret(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                              const CausalAssumption& assumption, const EstimationConfig& config) {
  config.validate(assumption);
  if (measures.empty()) throw ConfigError("measure list is empty");
  if (data.size() < 2 * config.k_folds) {
    throw DataError("need at least " + std::to_string(2 * config.k_folds) + " rows for " +
                    std::to_string(config.k_folds) + " folds, got " + std::to_string(data.size()));
  }

  const FoldPlan plan = assign_folds(data, config.k_folds, config.seed);
  RegretReport report;
  report.assumption = describe(assumption);
  report.estimator = config.estimator;
  report.n = data.size();
  report.k_folds = config.k_folds;
  report.seed = config.seed;

  const std::size_t nm = measures.size();
  std::vector<double> d_lo(nm, 0.0), d_hi(nm, 0.0), b_lo(nm, 0.0), b_hi(nm, 0.0);

  for (std::size_t k = 0; k < config.k_folds; ++k) {
    const std::string ctx = "fold " + std::to_string(k);
    const auto test_rows = plan.rows_in(k);
    const auto train_rows = plan.rows_outside(k);
    const ObservationalDataset test = data.subset(test_rows);
    const ObservationalDataset train = data.subset(train_rows);

    FoldDiagnostics diag;
    diag.fold = k;
    diag.rows = test.size();
    try {
      bool any_treated = false;
      for (std::size_t i = 0; i < test.size() && !any_treated; ++i) any_treated = test.d(i) == 1;
      if (!any_treated) throw DataError("fold has no d=1 rows");

      NuisanceModels nuis = fit_nuisances(train, assumption, config.classifier);
      diag.warnings = nuis.warnings;
      const IdentifiedVStats id = estimate_identified(test);

      if (config.estimator == Estimator::plugin) {
        const BoundingFunctions tau = bounding_functions(assumption, nuis);
        diag.set = map_to_uncertainty_set(tau, *nuis.e1, test, id, &diag.tau);
      } else {
        const double lambda = msm_lambda(assumption);
        diag.set.identified = id;
        for (int t = 0; t < 2; ++t) {
          const double rho = id.rho[t][0];
          double lo = dr_vstat_bound(test, lambda, *nuis.e1, *nuis.mu1, t, Side::lower, rho);
          double hi = dr_vstat_bound(test, lambda, *nuis.e1, *nuis.mu1, t, Side::upper, rho);
          if (lo > hi) {
            std::swap(lo, hi);
            diag.warnings.push_back("doubly robust bounds for v_1(" + std::to_string(t) + ",0) crossed; swapped");
          }
          (t == 1 ? diag.set.h10 : diag.set.h00) = Interval{lo, hi};
        }
      }
      diag.set.validate(1e-12);
    } catch (const Error& e) {
      rethrow_in_context(e, ctx);
    }

    for (std::size_t j = 0; j < nm; ++j) {
      try {
        const RegretInterval di = delta_interval(diag.set, measures[j]);
        const RegretInterval bi = baseline_interval(diag.set, measures[j]);
        diag.delta.push_back({di.lower(), di.upper()});
        diag.baseline.push_back({bi.lower(), bi.upper()});
        d_lo[j] += di.lower();
        d_hi[j] += di.upper();
        b_lo[j] += bi.lower();
        b_hi[j] += bi.upper();
      } catch (const Error& e) {
        rethrow_in_context(e, ctx + ", measure " + measure_name(measures[j]));
      }
    }
    report.h10.lower += diag.set.h10.lower;
    report.h10.upper += diag.set.h10.upper;
    report.h00.lower += diag.set.h00.lower;
    report.h00.upper += diag.set.h00.upper;
    for (const auto& w : diag.warnings) report.warnings.push_back(ctx + ": " + w);
    report.folds.push_back(std::move(diag));
  }

  const double kf = static_cast<double>(config.k_folds);
  report.h10 = {report.h10.lower / kf, report.h10.upper / kf};
  report.h00 = {report.h00.lower / kf, report.h00.upper / kf};
  for (std::size_t j = 0; j < nm; ++j) {
    report.results.push_back(MeasureResult{measures[j],
                                           RegretInterval(d_lo[j] / kf, d_hi[j] / kf, Method::delta, measures[j]),
                                           RegretInterval(b_lo[j] / kf, b_hi[j] / kf, Method::baseline, measures[j]),
                                           std::nullopt, std::nullopt});
  }
  return report;
}

BootstrapResult bootstrap_ci(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config) {
  config.validate(assumption);
  if (config.bootstrap_b < 1) throw ConfigError("bootstrap_b must be >= 1 for bootstrap_ci");
  const std::size_t B = config.bootstrap_b;
  const std::size_t nm = measures.size();
  const std::size_t n = data.size();

  struct Replicate {
    bool ok = false;
    std::string error;
    std::vector<double> values;  // per measure: delta lo, delta hi, baseline lo, baseline hi
  };
  std::vector<Replicate> reps(B);

  parallel_for(B, config.jobs, [&](std::size_t b) {
    const std::uint64_t seed_b = derive_seed(config.seed, b + 1);
    std::mt19937_64 rng(seed_b);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    EstimationConfig cfg = config;
    cfg.seed = seed_b;
    cfg.bootstrap_b = 0;
    try {
      const RegretReport rep = cross_fit_regret(data.subset(rows), measures, assumption, cfg);
      reps[b].values.reserve(4 * nm);
      for (const auto& r : rep.results) {
        reps[b].values.insert(reps[b].values.end(),
                              {r.delta.lower(), r.delta.upper(), r.baseline.lower(), r.baseline.upper()});
      }
      reps[b].ok = true;
    } catch (const Error& e) {
      reps[b].error = e.what();
    }
  });

  BootstrapResult out;
  out.summary.replicates = B;
  for (std::size_t b = 0; b < B; ++b) {
    if (!reps[b].ok) {
      ++out.summary.failures;
      if (out.summary.failure_messages.size() < 5) {
        out.summary.failure_messages.push_back("replicate " + std::to_string(b) + ": " + reps[b].error);
      }
    }
  }
  if (static_cast<double>(out.summary.failures) > 0.1 * static_cast<double>(B)) {
    std::string msg = "bootstrap aborted: " + std::to_string(out.summary.failures) + " of " + std::to_string(B) +
                      " replicates failed";
    for (const auto& m : out.summary.failure_messages) msg += "; " + m;
    throw NumericError(msg);
  }

  const double alpha = (1.0 - config.ci_level) / 2.0;
  auto band = [&](std::size_t column) {
    std::vector<double> v;
    for (const auto& r : reps)
      if (r.ok) v.push_back(r.values[column]);
    return Interval{quantile(v, alpha), quantile(v, 1.0 - alpha)};
  };
  for (std::size_t j = 0; j < nm; ++j) {
    out.delta.push_back({band(4 * j), band(4 * j + 1)});
    out.baseline.push_back({band(4 * j + 2), band(4 * j + 3)});
  }
  return out;
}

RegretReport estimate_regret(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config) {
  RegretReport report = cross_fit_regret(data, measures, assumption, config);
  if (config.bootstrap_b == 0) return report;
  const BootstrapResult boot = bootstrap_ci(data, measures, assumption, config);
  for (std::size_t j = 0; j < report.results.size(); ++j) {
    auto& r = report.results[j];
    r.delta_ci = boot.delta[j];
    r.baseline_ci = boot.baseline[j];
    r.delta.set_ci(boot.delta[j].lower.lower, boot.delta[j].upper.upper);
    r.baseline.set_ci(boot.baseline[j].lower.lower, boot.baseline[j].upper.upper);
  }
  report.bootstrap = boot.summary;
  return report;
}

RegretReport subgroup_report(const ObservationalDataset& data, const std::vector<PerformanceMeasure>& measures,
                             const CausalAssumption& assumption, const EstimationConfig& config) {
  RegretReport pooled = estimate_regret(data, measures, assumption, config);
  if (!data.has_group()) return pooled;

  std::map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < data.size(); ++i) by_group[data.group(i)].push_back(i);

  for (const auto& [name, rows] : by_group) {
    GroupEntry entry;
    entry.name = name;
    entry.size = rows.size();
    if (rows.size() < config.min_group_size) {
      entry.skipped_reason = "group size " + std::to_string(rows.size()) + " below minimum " +
                             std::to_string(config.min_group_size);
      pooled.groups.push_back(std::move(entry));
      continue;
    }
    EstimationConfig cfg = config;
    cfg.seed = derive_seed(config.seed, name_hash(name));
    try {
      entry.report = std::make_shared<RegretReport>(estimate_regret(data.subset(rows), measures, assumption, cfg));
    } catch (const Error& e) {
      entry.skipped_reason = e.what();
    }
    pooled.groups.push_back(std::move(entry));
  }
  return pooled;
}

}  // namespace regret
