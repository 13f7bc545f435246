#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <regret/estimation.hpp>
#include <regret/experiments.hpp>
#include <regret/synthetic.hpp>

namespace regret::cli {

/// Settings for one command, merged from a JSON config file and flags
/// (flags win).
struct RunConfig {
  std::string command;
  std::optional<std::string> input;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  std::string assumption;  // empty: command default
  std::optional<double> lambda;
  double gamma = 1.0;
  std::string z_column = "z";
  std::string w_column = "w";

  EstimationConfig estimation;
  std::vector<std::string> measures;  // empty: command default
  bool measures_set = false;
  std::optional<std::string> group_column;
  DatasetSchema schema;

  WorldConfig world;
  bool world_mode_set = false;
  bool healthcare = false;
  std::size_t n = 20000;
  std::size_t trials = 100;
  bool trials_set = false;
  std::vector<std::size_t> n_grid{1000, 5000, 20000};
  std::string knob = "lambda_star";
  std::vector<double> grid;
  std::vector<double> lambda_grid;
  std::size_t n_fixtures = 1000;
};

/// Applies the keys of a JSON object to `cfg`. Unknown keys, wrong types
/// and malformed JSON raise ConfigError.
void apply_config_json(RunConfig& cfg, const std::string& text);

/// Entry point shared by the executable and the tests. Returns the exit
/// code: 0 success, 1 config error, 2 data error, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Executes an already merged configuration; throws regret::Error.
void execute(const RunConfig& cfg, std::ostream& out);

}  // namespace regret::cli
