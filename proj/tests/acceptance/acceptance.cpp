#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <regret/assumptions.hpp>
#include <regret/bounds.hpp>
#include <regret/estimation.hpp>
#include <regret/experiments.hpp>
#include <regret/nuisance.hpp>
#include <regret/parallel.hpp>
#include <regret/synthetic.hpp>
#include <regret/vstats.hpp>
#include <regret_cli/cli.hpp>

#include "builders.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace regret;
using namespace regret::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::vector<PerformanceMeasure> five_measures() {
  const auto m = standard_measures();
  return {m.begin(), m.end()};
}

bool is_ppv(const PerformanceMeasure& m) {
  const auto* p = std::get_if<PredictiveValue>(&m);
  return p != nullptr && p->a() == 1;
}

std::vector<Fixture> fixtures(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Fixture> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_fixture(rng));
  return out;
}

// Least-squares slope of log|y| on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(std::abs(y[i]));
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(std::abs(y[i])) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// 1. Closed forms against the brute-force grid.
Outcome closed_forms(std::size_t jobs) {
  const auto start = Clock::now();
  const auto fx = fixtures(1000, 101);
  const auto measures = five_measures();
  std::vector<double> worst(fx.size(), 0.0);
  parallel_for(fx.size(), jobs, [&](std::size_t i) {
    for (const auto& m : measures) {
      const GridResult g = grid_search(fx[i].set, m, 1001);
      const RegretInterval d = delta_interval(fx[i].set, m);
      const RegretInterval b = baseline_interval(fx[i].set, m);
      const Interval gb = g.baseline();
      worst[i] = std::max({worst[i], std::abs(d.lower() - g.delta.lower), std::abs(d.upper() - g.delta.upper),
                           std::abs(b.lower() - gb.lower), std::abs(b.upper() - gb.upper)});
    }
  });
  const double err = *std::max_element(worst.begin(), worst.end());
  const double secs = seconds_since(start);
  return {err <= 5e-3 && secs < 120.0,
          "max endpoint error " + fmt(err) + " over 1000 fixtures x 5 measures, " + fmt(secs, 3) + " s"};
}

// 2. Nesting and coverage of the truth by the delta interval.
Outcome nesting(std::size_t jobs) {
  const auto fx = fixtures(1000, 202);
  const auto measures = five_measures();
  std::vector<std::size_t> nest_fail(fx.size(), 0), cover_fail(fx.size(), 0);
  parallel_for(fx.size(), jobs, [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(202, i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const UncertaintySet& s = fx[i].set;
    for (const auto& m : measures) {
      const RegretInterval d = delta_interval(s, m);
      const RegretInterval b = baseline_interval(s, m);
      if (d.lower() < b.lower() - 1e-9 || d.upper() > b.upper() + 1e-9) ++nest_fail[i];
      for (int k = 0; k < 100; ++k) {
        const double x10 = s.h10.lower + u(rng) * s.h10.width();
        const double x00 = s.h00.lower + u(rng) * s.h00.width();
        const Cells c = oracle_cells(s, x10, x00);
        const double v = oracle_measure(c, true, m) - oracle_measure(c, false, m);
        if (!d.contains(v, 1e-9)) ++cover_fail[i];
      }
    }
  });
  const auto nf = std::accumulate(nest_fail.begin(), nest_fail.end(), std::size_t{0});
  const auto cf = std::accumulate(cover_fail.begin(), cover_fail.end(), std::size_t{0});
  return {nf == 0 && cf == 0, std::to_string(nf) + " nesting violations, " + std::to_string(cf) +
                                  " of 500000 sampled regrets outside the delta interval"};
}

// 3. Width separation between baseline and delta intervals.
Outcome separation() {
  const auto fx = fixtures(1000, 303);
  const auto measures = five_measures();
  std::size_t below = 0;
  double ppv_gap = 0.0;
  for (const auto& f : fx) {
    for (const auto& m : measures) {
      const double gap = baseline_interval(f.set, m).width() - delta_interval(f.set, m).width();
      const double bound = separation_bound(f.set, m);
      if (gap < bound - 1e-9) ++below;
      if (is_ppv(m)) ppv_gap = std::max(ppv_gap, std::abs(gap - bound));
    }
  }
  const UncertaintySet F = fixture_f();
  const auto acc = Utility::accuracy();
  const RegretInterval d = delta_interval(F, acc), b = baseline_interval(F, acc);
  const double gap = b.width() - d.width();
  const double bound = separation_bound(F, acc);
  const bool fixture_ok = std::abs(d.lower() + 0.08) < 1e-12 && std::abs(d.upper() - 0.12) < 1e-12 &&
                          std::abs(b.lower() + 0.28) < 1e-12 && std::abs(b.upper() - 0.32) < 1e-12 &&
                          std::abs(gap - 0.40) < 1e-12 && std::abs(bound - 0.40) < 1e-12;
  return {below == 0 && ppv_gap <= 1e-12 && fixture_ok,
          std::to_string(below) + " gaps below the bound, max |ppv gap - bound| " + fmt(ppv_gap) +
              ", fixture F delta [" + fmt(d.lower()) + ", " + fmt(d.upper()) + "] baseline [" + fmt(b.lower()) +
              ", " + fmt(b.upper()) + "] gap " + fmt(gap) + " bound " + fmt(bound)};
}

// 4. Uncertainty set on discrete covariates against the exact expectation.
Outcome discrete_exactness() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> points(2, 8), count(4, 40);
  double worst = 0.0;
  std::size_t witness_fail = 0;
  const int worlds = 200;
  for (int w = 0; w < worlds; ++w) {
    const int k = points(rng);
    const double lambda = 1.0 + 2.0 * u(rng);
    std::vector<int> n0(k), n1(k);
    std::vector<double> pi1(k), mu(k);
    std::vector<Row> rows;
    for (int j = 0; j < k; ++j) {
      n0[j] = count(rng);
      n1[j] = count(rng);
      pi1[j] = std::floor(u(rng) * 5.0) / 4.0;
      mu[j] = 0.05 + 0.9 * u(rng);
      for (int r = 0; r < n0[j]; ++r) rows.push_back(Row{{double(j)}, 0, pi1[j], -1});
      for (int r = 0; r < n1[j]; ++r) rows.push_back(Row{{double(j)}, 1, pi1[j], u(rng) < mu[j] ? 1 : 0});
    }
    const auto data = make_dataset(rows);
    const double n = static_cast<double>(rows.size());
    NuisanceModels nm;
    nm.e1 = std::make_shared<FunctionModel>([&](std::span<const double> x) {
      const auto j = static_cast<std::size_t>(x[0]);
      return double(n1[j]) / double(n0[j] + n1[j]);
    });
    nm.mu1 = std::make_shared<FunctionModel>(
        [&](std::span<const double> x) { return mu[static_cast<std::size_t>(x[0])]; });
    const auto tau = bounding_functions(Msm{lambda}, nm);
    const auto id = estimate_identified(data);
    const UncertaintySet set = map_to_uncertainty_set(tau, *nm.e1, data, id);

    // Exact expectations over the discrete support.
    double lo10 = 0.0, hi10 = 0.0, lo00 = 0.0, hi00 = 0.0, rho10 = 0.0, rho00 = 0.0;
    for (int j = 0; j < k; ++j) {
      const double p = double(n0[j] + n1[j]) / n;
      const double e0 = double(n0[j]) / double(n0[j] + n1[j]);
      const double lo = mu[j] / lambda, hi = std::min(1.0, lambda * mu[j]);
      lo10 += p * pi1[j] * e0 * lo;
      hi10 += p * pi1[j] * e0 * hi;
      lo00 += p * (1.0 - pi1[j]) * e0 * lo;
      hi00 += p * (1.0 - pi1[j]) * e0 * hi;
      rho10 += p * pi1[j] * e0;
      rho00 += p * (1.0 - pi1[j]) * e0;
    }
    worst = std::max({worst, std::abs(set.h10.lower - lo10), std::abs(set.h10.upper - hi10),
                      std::abs(set.h00.lower - lo00), std::abs(set.h00.upper - hi00)});

    // Minimality: setting E[Y(1) | D = 0, x] to either bounding function is
    // a joint law consistent with the data and the assumption, and it lands
    // on the endpoints, so no smaller set is valid.
    for (const auto& [x10, x00] : {std::pair{lo10, lo00}, std::pair{hi10, hi00}}) {
      const bool inside = x10 >= 0.0 && x10 <= rho10 + 1e-15 && x00 >= 0.0 && x00 <= rho00 + 1e-15;
      const Cells c = oracle_cells(set, x10, x00);
      double total = 0.0;
      bool valid = inside;
      for (const auto& a : c)
        for (const auto& b : a)
          for (double v : b) {
            total += v;
            valid = valid && v >= -1e-15;
          }
      if (!valid || std::abs(total - 1.0) > 1e-12) ++witness_fail;
    }
  }
  return {worst <= 1e-12 && witness_fail == 0,
          "max endpoint error " + fmt(worst) + " over " + std::to_string(worlds) + " worlds, " +
              std::to_string(witness_fail) + " invalid witnesses"};
}

// 5. Coverage of the oracle regret as n grows.
Outcome coverage(std::size_t jobs) {
  const auto start = Clock::now();
  WorldConfig world;
  ExperimentConfig cfg;
  cfg.trials = 100;
  cfg.jobs = jobs;
  cfg.seed = 505;
  cfg.measures = {Utility::accuracy()};
  const std::vector<std::size_t> grid{1000, 5000, 20000};
  const TrialTable t = coverage_experiment(world, grid, Msm{1.4}, cfg);
  const double secs = seconds_since(start);
  std::vector<double> cov;
  for (auto n : grid) cov.push_back(t.at(double(n), "accuracy", Method::delta).coverage);
  const double base1k = t.at(1000.0, "accuracy", Method::baseline).coverage;
  const bool ok = cov[2] >= 0.90 && cov[0] <= cov[1] && cov[1] <= cov[2] && base1k >= cov[0] && secs < 900.0;
  return {ok, "delta coverage " + fmt(cov[0]) + " / " + fmt(cov[1]) + " / " + fmt(cov[2]) +
                  ", baseline at 1000 " + fmt(base1k) + ", " + fmt(secs, 3) + " s at --jobs " +
                  std::to_string(jobs)};
}

WorldConfig well_specified_world() {
  WorldConfig w;
  w.confounder_strength = 0.0;
  w.beta0 = 0.0;
  w.seed = 606;
  return w;
}

// 6. Root-n rate of the plug-in v-bound.
Outcome plugin_rate(std::size_t jobs) {
  const SyntheticWorld world(well_specified_world());
  const auto truth = world.truth(1);
  const double lambda = 1.4;
  const auto tau = bounding_functions(Msm{lambda}, truth.models);

  // Population value by Monte Carlo over X.
  const std::size_t chunks = 16, chunk_n = 500000;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const auto s = world.generate(chunk_n, derive_seed(6060, c));
    double acc = 0.0;
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      const auto x = s.data.x(i);
      acc += s.data.pi1(i) * (1.0 - truth.models.e1->predict(x)) * tau.tau_hi(x);
    }
    partial[c] = acc / double(chunk_n);
  });
  const double theta = std::accumulate(partial.begin(), partial.end(), 0.0) / double(chunks);

  const std::vector<std::size_t> ns{2000, 8000, 32000};
  const std::size_t seeds = 20;
  std::vector<double> rmse;
  for (std::size_t n : ns) {
    std::vector<double> sq(seeds);
    parallel_for(seeds, jobs, [&](std::size_t s) {
      const auto sample = world.generate(n, derive_seed(n, s));
      EstimationConfig cfg;
      cfg.bootstrap_b = 0;
      cfg.seed = derive_seed(n, s + 1000);
      const auto r = cross_fit_regret(sample.data, {Utility::accuracy()}, Msm{lambda}, cfg);
      sq[s] = (r.h10.upper - theta) * (r.h10.upper - theta);
    });
    rmse.push_back(std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0) / double(seeds)));
  }
  const double r1 = rmse[0] / rmse[1], r2 = rmse[1] / rmse[2];
  const bool ok = r1 >= 1.5 && r1 <= 2.7 && r2 >= 1.5 && r2 <= 2.7;
  return {ok, "RMSE " + fmt(rmse[0]) + " / " + fmt(rmse[1]) + " / " + fmt(rmse[2]) + ", ratios " + fmt(r1) +
                  " and " + fmt(r2)};
}

// 7. Second-order bias of the doubly robust bound.
Outcome dr_second_order(std::size_t jobs) {
  const SyntheticWorld world(well_specified_world());
  const auto truth = world.truth(1);
  const double lambda = 1.4;
  const std::vector<double> eps{0.02, 0.04, 0.08};
  const std::size_t seeds = 20, n = 100000;

  auto shifted = [](const ModelPtr& base, double e) -> ModelPtr {
    return std::make_shared<FunctionModel>(
        [base, e](std::span<const double> x) { return std::clamp(base->predict(x) + e, 1e-3, 1.0 - 1e-3); });
  };

  // est[seed][eps index + 1][estimator * 4 + t * 2 + side]; index 0 is eps = 0.
  std::vector<std::vector<std::array<double, 8>>> est(seeds, std::vector<std::array<double, 8>>(eps.size() + 1));
  parallel_for(seeds, jobs, [&](std::size_t s) {
    const auto sample = world.generate(n, derive_seed(707, s));
    const auto id = estimate_identified(sample.data);
    for (std::size_t k = 0; k <= eps.size(); ++k) {
      const double e = k == 0 ? 0.0 : eps[k - 1];
      NuisanceModels nm;
      // e0 = 1 - e1 and mu1 both move up by eps.
      nm.e1 = shifted(truth.models.e1, -e);
      nm.mu1 = shifted(truth.models.mu1, e);
      const auto tau = bounding_functions(Msm{lambda}, nm);
      for (int t = 0; t < 2; ++t) {
        const Interval p = plugin_vstat_bound(sample.data, tau, *nm.e1, t, id.rho[t][0]);
        est[s][k][t * 2 + 0] = p.lower;
        est[s][k][t * 2 + 1] = p.upper;
        est[s][k][4 + t * 2 + 0] = dr_vstat_bound(sample.data, lambda, *nm.e1, *nm.mu1, t, Side::lower, id.rho[t][0]);
        est[s][k][4 + t * 2 + 1] = dr_vstat_bound(sample.data, lambda, *nm.e1, *nm.mu1, t, Side::upper, id.rho[t][0]);
      }
    }
  });

  // Bias against the same estimator at the true nuisances on the same draw.
  std::array<double, 8> slope{};
  for (int q = 0; q < 8; ++q) {
    std::vector<double> bias;
    for (std::size_t k = 1; k <= eps.size(); ++k) {
      double b = 0.0;
      for (std::size_t s = 0; s < seeds; ++s) b += est[s][k][q] - est[s][0][q];
      bias.push_back(b / double(seeds));
    }
    slope[q] = loglog_slope(eps, bias);
  }
  const double plug_max = *std::max_element(slope.begin(), slope.begin() + 4);
  const double dr_min = *std::min_element(slope.begin() + 4, slope.end());
  std::string detail = "plug-in slopes";
  for (int q = 0; q < 4; ++q) detail += " " + fmt(slope[q], 3);
  detail += ", DR slopes";
  for (int q = 4; q < 8; ++q) detail += " " + fmt(slope[q], 3);
  detail += " (t0 lower, t0 upper, t1 lower, t1 upper)";
  return {dr_min >= 1.6 && plug_max <= 1.3, detail};
}

// 8. Violation sweeps.
Outcome sweeps(std::size_t jobs) {
  ExperimentConfig cfg;
  cfg.trials = 100;
  cfg.jobs = jobs;
  cfg.seed = 808;
  cfg.measures = {Utility::accuracy()};
  std::string detail;
  bool ok = true;

  {
    WorldConfig w;
    const std::vector<double> grid{0.6, 0.8, 1.0, 1.2, 1.4, 1.8, 2.5};
    const TrialTable t = violation_sweep(w, SweepKnob::lambda_star, grid, Msm{1.4}, cfg);
    double inside_min = 1.0;
    for (double g : grid) {
      if (g > 1.0 / 1.4 && g < 1.4) inside_min = std::min(inside_min, t.at(g, "accuracy", Method::delta).coverage);
    }
    const double c14 = t.at(1.4, "accuracy", Method::delta).coverage;
    const double c25 = t.at(2.5, "accuracy", Method::delta).coverage;
    ok = ok && inside_min >= 0.9 && c25 < c14;
    detail += "lambda*: inside min " + fmt(inside_min) + ", at 1.4 " + fmt(c14) + ", at 2.5 " + fmt(c25);
  }
  WorldConfig iv;
  iv.mode = WorldMode::iv;
  const CausalAssumption assume_iv = InstrumentalVariable{"z"};
  {
    const std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.5, 1.0};
    const TrialTable t = violation_sweep(iv, SweepKnob::beta1, grid, assume_iv, cfg);
    std::vector<double> cov;
    for (double g : grid) cov.push_back(t.at(g, "accuracy", Method::delta).coverage);
    const double rho = spearman(grid, cov);
    ok = ok && rho <= -0.5;
    detail += "; beta1: coverage";
    for (double c : cov) detail += " " + fmt(c, 3);
    detail += ", spearman " + fmt(rho, 3);
  }
  {
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0, 1.5};
    const TrialTable t = violation_sweep(iv, SweepKnob::beta0, grid, assume_iv, cfg);
    double prev = std::numeric_limits<double>::infinity(), cov_min = 1.0;
    bool monotone = true;
    detail += "; beta0: width";
    for (double g : grid) {
      const auto& s = t.at(g, "accuracy", Method::delta);
      monotone = monotone && s.mean_width <= prev;
      prev = s.mean_width;
      cov_min = std::min(cov_min, s.coverage);
      detail += " " + fmt(s.mean_width, 3);
    }
    ok = ok && monotone && cov_min >= 0.9;
    detail += ", min coverage " + fmt(cov_min);
  }
  return {ok, detail};
}

// 9. Design sensitivity of delta versus baseline intervals.
Outcome design(std::size_t jobs) {
  ExperimentConfig cfg;
  cfg.trials = 20;
  cfg.jobs = jobs;
  cfg.seed = 909;
  cfg.measures = five_measures();
  std::vector<double> grid;
  for (int k = 10; k <= 30; ++k) grid.push_back(k / 10.0);
  const auto rows = design_sensitivity(WorldConfig{}, grid, cfg);
  std::size_t failed = 0, violations = 0, strict = 0, pairs = 0;
  for (const auto& r : rows) {
    if (r.failed) {
      ++failed;
      continue;
    }
    if (r.lambda0_delta < r.lambda0_baseline) ++violations;
    if (r.measure == "ppv") continue;
    ++pairs;
    if (r.lambda0_delta > r.lambda0_baseline) ++strict;
  }
  const bool ok = failed == 0 && violations == 0 && pairs > 0 && 2 * strict >= pairs;
  return {ok, std::to_string(rows.size()) + " pairs, " + std::to_string(failed) + " failed, " +
                  std::to_string(violations) + " with delta below baseline, strict on " + std::to_string(strict) +
                  " of " + std::to_string(pairs) + " non-ppv pairs"};
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"regret"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = regret::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every file of a run, JSON with the metadata block removed.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string text = read_text(e.path());
    if (e.path().extension() == ".json") {
      auto j = nlohmann::json::parse(text);
      j.erase("metadata");
      text = j.dump();
    }
    files[fs::relative(e.path(), root).string()] = std::move(text);
  }
  return files;
}

// 10. Repeated commands reproduce their outputs.
Outcome determinism(std::size_t jobs) {
  const fs::path root = fs::temp_directory_path() / ("regret_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  write_text(root / "healthcare.json", R"({"healthcare": true, "n": 2000})");
  write_text(root / "coverage.json", R"({"n_grid": [400, 800], "trials": 4})");
  write_text(root / "sweep.json", R"({"knob": "lambda_star", "grid": [1.0, 2.0], "trials": 3, "n": 1500})");
  write_text(root / "sensitivity.json", R"({"lambda_grid": [1.0, 1.5, 2.0], "trials": 2, "n": 1500})");

  auto run_all = [&](const std::string& name, std::size_t j) {
    const fs::path dir = root / name;
    const std::string js = std::to_string(j);
    int bad = 0;
    auto go = [&](std::vector<std::string> args) {
      args.push_back("--jobs");
      args.push_back(js);
      bad += run_cli(args) != 0;
    };
    go({"simulate", "--n", "3000", "--seed", "10", "--out", (dir / "simulate").string()});
    go({"analyze", "--input", (dir / "simulate" / "data.csv").string(), "--seed", "10", "--bootstrap", "20",
        "--out", (dir / "analyze").string()});
    go({"simulate", "--config", (root / "healthcare.json").string(), "--seed", "11", "--out",
        (dir / "healthcare").string()});
    go({"coverage", "--config", (root / "coverage.json").string(), "--seed", "10", "--out",
        (dir / "coverage").string()});
    go({"sweep", "--config", (root / "sweep.json").string(), "--seed", "10", "--out", (dir / "sweep").string()});
    go({"sensitivity", "--config", (root / "sensitivity.json").string(), "--seed", "10", "--out",
        (dir / "sensitivity").string()});
    go({"separation", "--n-fixtures", "50", "--seed", "10", "--out", (dir / "separation").string()});
    return bad;
  };
  const int bad = run_all("first", 1) + run_all("second", 1) + run_all("jobs", std::max<std::size_t>(jobs, 2));
  const auto a = snapshot(root / "first"), b = snapshot(root / "second"), c = snapshot(root / "jobs");
  std::size_t differ = 0;
  for (const auto& [name, text] : a) {
    if (!b.count(name) || b.at(name) != text) ++differ;
    if (!c.count(name) || c.at(name) != text) ++differ;
  }
  fs::remove_all(root);
  const bool ok = bad == 0 && !a.empty() && a.size() == b.size() && a.size() == c.size() && differ == 0;
  return {ok, std::to_string(a.size()) + " output files per run, " + std::to_string(bad) + " failed commands, " +
                  std::to_string(differ) + " differing files across repeat and job-count runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the regret library"};
  std::size_t jobs = 1;
  std::vector<int> only;
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form correctness", [&] { return closed_forms(jobs); }},
      {"nesting and truth coverage", [&] { return nesting(jobs); }},
      {"width separation", [] { return separation(); }},
      {"discrete-covariate exactness", [] { return discrete_exactness(); }},
      {"coverage in n", [&] { return coverage(jobs); }},
      {"plug-in rate", [&] { return plugin_rate(jobs); }},
      {"doubly robust second-order bias", [&] { return dr_second_order(jobs); }},
      {"violation sweeps", [&] { return sweeps(jobs); }},
      {"design sensitivity", [&] { return design(jobs); }},
      {"determinism", [&] { return determinism(jobs); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << criteria[i].first << ": "
              << o.detail << " [" << fmt(seconds_since(start), 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
