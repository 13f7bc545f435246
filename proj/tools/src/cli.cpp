#include "regret_cli/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <regret/parallel.hpp>
#include <regret/report.hpp>

namespace regret::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"analyze", "estimate delta and baseline regret intervals from a CSV dataset"},
    {"simulate", "draw a synthetic dataset with oracle outcomes"},
    {"coverage", "oracle-regret coverage as the sample size grows"},
    {"sweep", "coverage and width while one data-generating knob varies"},
    {"sensitivity", "smallest Lambda at which each interval contains zero"},
    {"separation", "width gap between baseline and delta intervals on random sets"},
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ';' || c == ' ') continue;
    cur.push_back(c);
  }
  // Measures like "utility:1,0,0,1" contain commas, so split on commas only
  // where the next token starts a new name.
  std::string token;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const char c = cur[i];
    if (c == ',' && (i + 1 >= cur.size() || !(std::isdigit(static_cast<unsigned char>(cur[i + 1])) ||
                                              cur[i + 1] == '.' || cur[i + 1] == '-'))) {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

void apply_world(WorldConfig& w, bool& mode_set, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config key 'world' must be an object");
  for (const auto& [key, v] : obj.items()) {
    const std::string k = "world." + key;
    if (key == "v_dim") {
      w.v_dim = get_count(v, k);
    } else if (key == "u_dim") {
      w.u_dim = get_count(v, k);
    } else if (key == "z_levels") {
      w.z_levels = get_count(v, k);
    } else if (key == "mode") {
      w.mode = parse_world_mode(get_as<std::string>(v, k));
      mode_set = true;
    } else if (key == "beta0") {
      w.beta0 = get_as<double>(v, k);
    } else if (key == "beta1") {
      w.beta1 = get_as<double>(v, k);
    } else if (key == "lambda") {
      w.lambda = get_as<double>(v, k);
    } else if (key == "lambda_star_range") {
      const auto r = get_as<std::vector<double>>(v, k);
      if (r.size() != 2) throw ConfigError("world.lambda_star_range must have two entries");
      w.lambda_star_range = Interval{r[0], r[1]};
    } else if (key == "confounder_strength") {
      w.confounder_strength = get_as<double>(v, k);
    } else if (key == "with_proxy_w") {
      w.with_proxy_w = get_as<bool>(v, k);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

void apply_schema(DatasetSchema& s, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config key 'schema' must be an object");
  for (const auto& [key, v] : obj.items()) {
    const std::string k = "schema." + key;
    if (key == "x_columns") {
      s.x_columns = get_as<std::vector<std::string>>(v, k);
    } else if (key == "x_prefix") {
      s.x_prefix = get_as<std::string>(v, k);
    } else if (key == "d") {
      s.d = get_as<std::string>(v, k);
    } else if (key == "pi1") {
      s.pi1 = get_as<std::string>(v, k);
    } else if (key == "t") {
      s.t = get_as<std::string>(v, k);
    } else if (key == "y") {
      s.y = get_as<std::string>(v, k);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

json metadata(const RunConfig& cfg) {
  return json{{"tool", "regret"}, {"version", kVersion}, {"command", cfg.command}, {"jobs", cfg.jobs},
              {"generated_at", timestamp()}};
}

std::vector<PerformanceMeasure> measures_or(const RunConfig& cfg, const std::vector<std::string>& fallback) {
  const std::vector<std::string>& names = cfg.measures_set ? cfg.measures : fallback;
  if (names.empty()) throw ConfigError("measure list is empty");
  std::vector<PerformanceMeasure> out;
  for (const auto& n : names) out.push_back(parse_measure(n));
  return out;
}

std::vector<std::string> standard_names() {
  std::vector<std::string> out;
  for (const auto& m : standard_measures()) out.push_back(measure_name(m));
  return out;
}

CausalAssumption assumption_for(const RunConfig& cfg, const std::string& default_kind, double default_lambda) {
  const std::string kind = cfg.assumption.empty() ? default_kind : cfg.assumption;
  return make_assumption(kind, cfg.lambda.value_or(default_lambda), cfg.gamma, cfg.z_column, cfg.w_column);
}

std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path p(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

void write_json(const std::filesystem::path& path, json j, const RunConfig& cfg) {
  j["metadata"] = metadata(cfg);
  write_text(path, j.dump(2) + "\n");
}

ExperimentConfig experiment_config(const RunConfig& cfg, std::vector<PerformanceMeasure> measures) {
  ExperimentConfig e;
  e.trials = cfg.trials;
  e.n = cfg.n;
  e.jobs = cfg.jobs;
  e.seed = cfg.seed;
  e.estimation = cfg.estimation;
  e.estimation.bootstrap_b = 0;
  e.measures = std::move(measures);
  e.validate();
  return e;
}

void cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.input) throw ConfigError("analyze requires --input");
  const auto measures = measures_or(cfg, standard_names());
  const CausalAssumption assumption = assumption_for(cfg, "msm", 1.2);
  EstimationConfig est = cfg.estimation;
  est.seed = cfg.seed;
  est.jobs = cfg.jobs;
  est.validate(assumption);

  DatasetSchema schema = cfg.schema;
  if (needs_instrument(assumption)) schema.z = cfg.z_column;
  if (std::holds_alternative<ProximalTreatmentOutcome>(assumption)) schema.w = cfg.w_column;
  if (cfg.group_column) schema.group = *cfg.group_column;
  const LoadResult loaded = load_dataset(*cfg.input, schema);

  const RegretReport report = cfg.group_column ? subgroup_report(loaded.data, measures, assumption, est)
                                               : estimate_regret(loaded.data, measures, assumption, est);
  const auto dir = out_dir(cfg);
  json j = to_json(report);
  j["input"] = json{{"rows", loaded.data.size()},
                    {"missing_outcomes", loaded.data.missing_y_count()},
                    {"masked_outcomes", loaded.masked_outcomes}};
  write_json(dir / "report.json", std::move(j), cfg);
  write_text(dir / "report.csv", report_csv(report));

  for (const auto& r : report.results) {
    out << measure_name(r.measure) << ": delta [" << format_double(r.delta.lower()) << ", "
        << format_double(r.delta.upper()) << "], baseline [" << format_double(r.baseline.lower()) << ", "
        << format_double(r.baseline.upper()) << "]\n";
  }
  out << "wrote " << (dir / "report.json").string() << " and " << (dir / "report.csv").string() << "\n";
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto dir = out_dir(cfg);
  OracleSample sample = [&] {
    if (cfg.healthcare) return healthcare_sample(HealthcareConfig{cfg.n, cfg.seed, 0.55});
    WorldConfig w = cfg.world;
    w.seed = derive_seed(cfg.seed, 0);
    return SyntheticWorld(w).generate(cfg.n, derive_seed(cfg.seed, 1));
  }();
  std::vector<int> y1(sample.y1.begin(), sample.y1.end());
  save_dataset(dir / "data.csv", sample.data, {{"y1", y1}});

  json oracle = json::object();
  for (const auto& m : standard_measures()) {
    try {
      oracle[measure_name(m)] = oracle_regret(sample, m);
    } catch (const NumericError&) {
      oracle[measure_name(m)] = nullptr;
    }
  }
  json j{{"rows", sample.data.size()},
         {"healthcare", cfg.healthcare},
         {"mu0_clipped", sample.mu0_clipped},
         {"missing_outcomes", sample.data.missing_y_count()},
         {"oracle_table", to_json(oracle_table(sample))},
         {"oracle_regret", oracle}};
  write_json(dir / "simulate.json", std::move(j), cfg);
  out << "wrote " << sample.data.size() << " rows to " << (dir / "data.csv").string() << "\n";
}

void cmd_coverage(const RunConfig& cfg, std::ostream& out) {
  const ExperimentConfig e = experiment_config(cfg, measures_or(cfg, {"accuracy"}));
  const CausalAssumption assumption = assumption_for(cfg, "msm", cfg.world.lambda);
  e.estimation.validate(assumption);
  const TrialTable t = coverage_experiment(cfg.world, cfg.n_grid, assumption, e);
  const auto dir = out_dir(cfg);
  write_text(dir / "coverage.csv", trial_table_csv(t, "n"));
  write_text(dir / "coverage_summary.csv", summary_csv(t, "n"));
  write_json(dir / "coverage.json", to_json(t, "n"), cfg);
  out << summary_csv(t, "n");
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const SweepKnob knob = parse_sweep_knob(cfg.knob);
  WorldConfig world = cfg.world;
  std::vector<double> grid = cfg.grid;
  std::string default_kind = "msm";
  if (knob == SweepKnob::lambda_star) {
    if (grid.empty()) grid = {0.6, 0.8, 1.0, 1.2, 1.4, 1.8, 2.5};
  } else {
    if (!cfg.world_mode_set) world.mode = WorldMode::iv;
    if (grid.empty()) {
      grid = knob == SweepKnob::beta0 ? std::vector<double>{0.0, 0.25, 0.5, 1.0, 1.5}
                                      : std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.5, 1.0};
    }
    default_kind = "iv";
  }
  const ExperimentConfig e = experiment_config(cfg, measures_or(cfg, {"accuracy"}));
  const CausalAssumption assumption = assumption_for(cfg, default_kind, world.lambda);
  e.estimation.validate(assumption);
  const TrialTable t = violation_sweep(world, knob, grid, assumption, e);
  const auto dir = out_dir(cfg);
  write_text(dir / "sweep.csv", trial_table_csv(t, cfg.knob));
  write_text(dir / "sweep_summary.csv", summary_csv(t, cfg.knob));
  write_json(dir / "sweep.json", to_json(t, cfg.knob), cfg);
  out << summary_csv(t, cfg.knob);
}

void cmd_sensitivity(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> grid = cfg.lambda_grid;
  if (grid.empty()) {
    for (int k = 10; k <= 30; ++k) grid.push_back(k / 10.0);
  }
  RunConfig c = cfg;
  if (!cfg.trials_set) c.trials = 20;
  const ExperimentConfig e = experiment_config(c, measures_or(cfg, standard_names()));
  const auto rows = design_sensitivity(cfg.world, grid, e);
  const auto dir = out_dir(cfg);
  write_text(dir / "sensitivity.csv", sensitivity_csv(rows));
  write_json(dir / "sensitivity.json", to_json(rows), cfg);
  out << sensitivity_csv(rows);
}

void cmd_separation(const RunConfig& cfg, std::ostream& out) {
  const auto rows = separation_characterization(cfg.n_fixtures, cfg.seed);
  const auto dir = out_dir(cfg);
  write_text(dir / "separation.csv", separation_csv(rows));
  const json j = to_json(rows);
  write_json(dir / "separation.json", j, cfg);
  out << "fixtures: " << cfg.n_fixtures << ", min(improvement - bound): " << j["min_improvement_minus_bound"].dump()
      << "\n";
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  auto& est = cfg.estimation;
  for (const auto& [key, v] : root.items()) {
    if (key == "input") {
      cfg.input = get_as<std::string>(v, key);
    } else if (key == "out") {
      cfg.out = get_as<std::string>(v, key);
    } else if (key == "seed") {
      cfg.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "jobs") {
      cfg.jobs = get_count(v, key);
    } else if (key == "assumption") {
      cfg.assumption = get_as<std::string>(v, key);
    } else if (key == "lambda") {
      cfg.lambda = get_as<double>(v, key);
    } else if (key == "gamma") {
      cfg.gamma = get_as<double>(v, key);
    } else if (key == "z_column") {
      cfg.z_column = get_as<std::string>(v, key);
    } else if (key == "w_column") {
      cfg.w_column = get_as<std::string>(v, key);
    } else if (key == "k_folds") {
      est.k_folds = get_count(v, key);
    } else if (key == "bootstrap") {
      est.bootstrap_b = get_count(v, key);
    } else if (key == "ci_level") {
      est.ci_level = get_as<double>(v, key);
    } else if (key == "estimator") {
      est.estimator = parse_estimator(get_as<std::string>(v, key));
    } else if (key == "min_group_size") {
      est.min_group_size = get_count(v, key);
    } else if (key == "learner") {
      est.classifier.learner = parse_learner(get_as<std::string>(v, key));
    } else if (key == "l2_penalty") {
      est.classifier.l2_penalty = get_as<double>(v, key);
    } else if (key == "max_iter") {
      est.classifier.max_iter = static_cast<int>(get_count(v, key));
    } else if (key == "tol") {
      est.classifier.tol = get_as<double>(v, key);
    } else if (key == "measures") {
      cfg.measures = v.is_string() ? split_list(v.get<std::string>()) : get_as<std::vector<std::string>>(v, key);
      cfg.measures_set = true;
    } else if (key == "group_column") {
      cfg.group_column = get_as<std::string>(v, key);
    } else if (key == "schema") {
      apply_schema(cfg.schema, v);
    } else if (key == "world") {
      apply_world(cfg.world, cfg.world_mode_set, v);
    } else if (key == "healthcare") {
      cfg.healthcare = get_as<bool>(v, key);
    } else if (key == "n") {
      cfg.n = get_count(v, key);
    } else if (key == "trials") {
      cfg.trials = get_count(v, key);
      cfg.trials_set = true;
    } else if (key == "n_grid") {
      cfg.n_grid = get_as<std::vector<std::size_t>>(v, key);
    } else if (key == "knob") {
      cfg.knob = get_as<std::string>(v, key);
    } else if (key == "grid") {
      cfg.grid = get_as<std::vector<double>>(v, key);
    } else if (key == "lambda_grid") {
      cfg.lambda_grid = get_as<std::vector<double>>(v, key);
    } else if (key == "n_fixtures") {
      cfg.n_fixtures = get_count(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

void execute(const RunConfig& cfg, std::ostream& out) {
  if (cfg.command == "analyze") return cmd_analyze(cfg, out);
  if (cfg.command == "simulate") return cmd_simulate(cfg, out);
  if (cfg.command == "coverage") return cmd_coverage(cfg, out);
  if (cfg.command == "sweep") return cmd_sweep(cfg, out);
  if (cfg.command == "sensitivity") return cmd_sensitivity(cfg, out);
  if (cfg.command == "separation") return cmd_separation(cfg, out);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

namespace {

struct Flags {
  std::string input, config, out, assumption, measures, group_column, estimator;
  std::uint64_t seed = 0;
  std::size_t jobs = 1, k_folds = 2, bootstrap = 0, n = 0, trials = 0, n_fixtures = 0;
  double lambda = 1.0, gamma = 1.0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--input", f.input, "CSV dataset");
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--jobs", f.jobs, "worker threads");
  sub->add_option("--assumption", f.assumption, "manski | msm | rosenbaum | iv | proximal_t | proximal_tw");
  sub->add_option("--lambda", f.lambda, "MSM odds-ratio bound");
  sub->add_option("--gamma", f.gamma, "Rosenbaum Gamma");
  sub->add_option("--k-folds", f.k_folds, "cross-fitting folds");
  sub->add_option("--bootstrap", f.bootstrap, "bootstrap replicates");
  sub->add_option("--measures", f.measures, "comma-separated measure list");
  sub->add_option("--group-column", f.group_column, "subgroup column");
  sub->add_option("--estimator", f.estimator, "plugin | doubly_robust");
  sub->add_option("--n", f.n, "sample size");
  sub->add_option("--trials", f.trials, "Monte Carlo trials");
  sub->add_option("--n-fixtures", f.n_fixtures, "random fixtures for separation");
}

void apply_flags(RunConfig& cfg, CLI::App* sub, const Flags& f) {
  auto set = [sub](const char* name) { return sub->count(name) > 0; };
  if (set("--input")) cfg.input = f.input;
  if (set("--out")) cfg.out = f.out;
  if (set("--seed")) cfg.seed = f.seed;
  if (set("--jobs")) cfg.jobs = f.jobs;
  if (set("--assumption")) cfg.assumption = f.assumption;
  if (set("--lambda")) cfg.lambda = f.lambda;
  if (set("--gamma")) cfg.gamma = f.gamma;
  if (set("--k-folds")) cfg.estimation.k_folds = f.k_folds;
  if (set("--bootstrap")) cfg.estimation.bootstrap_b = f.bootstrap;
  if (set("--measures")) {
    cfg.measures = split_list(f.measures);
    cfg.measures_set = true;
  }
  if (set("--group-column")) cfg.group_column = f.group_column;
  if (set("--estimator")) cfg.estimation.estimator = parse_estimator(f.estimator);
  if (set("--n")) cfg.n = f.n;
  if (set("--trials")) {
    cfg.trials = f.trials;
    cfg.trials_set = true;
  }
  if (set("--n-fixtures")) cfg.n_fixtures = f.n_fixtures;
}

int report_error(std::ostream& err, int code, const char* kind, const std::string& what) {
  err << "error [" << kind << "]\n  " << what << "\n  exit code " << code << "\n";
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regret intervals for policy comparison under unmeasured confounding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags flags;
  std::vector<CLI::App*> subs;
  for (const auto& [name, description] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    add_flags(sub, flags);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, 1, "config", e.what());
  }

  try {
    CLI::App* sub = nullptr;
    for (auto* s : subs)
      if (s->parsed()) sub = s;
    RunConfig cfg;
    cfg.command = sub->get_name();
    if (sub->count("--config")) {
      std::ifstream in(flags.config);
      if (!in) throw ConfigError("cannot read config file " + flags.config);
      std::stringstream buf;
      buf << in.rdbuf();
      apply_config_json(cfg, buf.str());
    }
    apply_flags(cfg, sub, flags);
    execute(cfg, out);
    return 0;
  } catch (const ConfigError& e) {
    return report_error(err, 1, "config", e.what());
  } catch (const DataError& e) {
    return report_error(err, 2, "data", e.what());
  } catch (const Error& e) {
    const int code = static_cast<int>(e.kind());
    return report_error(err, code, code == 1 ? "config" : code == 2 ? "data" : "numeric", e.what());
  } catch (const std::exception& e) {
    return report_error(err, 3, "numeric", e.what());
  }
}

}  // namespace regret::cli
