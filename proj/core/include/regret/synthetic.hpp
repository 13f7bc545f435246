#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "regret/dataset.hpp"
#include "regret/nuisance.hpp"
#include "regret/types.hpp"
#include "regret/vstats.hpp"

namespace regret {

enum class WorldMode { msm, iv };

WorldMode parse_world_mode(const std::string& name);
std::string to_string(WorldMode m);

struct WorldConfig {
  std::size_t v_dim = 5;
  std::size_t u_dim = 2;
  std::size_t z_levels = 3;
  WorldMode mode = WorldMode::msm;
  double beta0 = 1.0;  // instrument relevance
  double beta1 = 0.0;  // exclusion violation
  double lambda = 1.4;
  /// Range of the per-row Lambda* in msm mode; [1/lambda, lambda] if unset.
  std::optional<Interval> lambda_star_range;
  /// Scales every weight on the unobserved U. At 0 the status quo and
  /// outcome models are logistic in X.
  double confounder_strength = 1.0;
  /// Emit a binary proxy w of the first confounder.
  bool with_proxy_w = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Observational rows plus the potential outcome Y(1) on every row.
struct OracleSample {
  ObservationalDataset data;
  std::vector<std::uint8_t> y1;
  std::size_t mu0_clipped = 0;  // msm rows where Lambda* mu1 exceeded 1
};

/// True conditional probabilities, integrated over U (and Z where noted).
struct TrueNuisances {
  NuisanceModels models;  // e1, mu1, and per-level e1(x,z), mu1(x,z)
  ModelPtr mu0;           // E[Y(1) | D = 0, X = x]
  ModelPtr pi1;           // proposed policy pi(x)
};

/// A fully specified data-generating process with oracle access to Y(1).
class SyntheticWorld {
 public:
  /// Draws all weights from config.seed.
  explicit SyntheticWorld(WorldConfig config);

  const WorldConfig& config() const { return config_; }
  Interval lambda_star_range() const;

  double proposed_policy(std::span<const double> x) const;
  /// Softmax instrument distribution gamma(x).
  Eigen::VectorXd instrument_probs(std::span<const double> x) const;
  /// Logit pieces: X-part of each linear index (U enters separately).
  double status_quo_index(std::span<const double> x, int z) const;
  double outcome1_index(std::span<const double> x, int z) const;

  OracleSample generate(std::size_t n, std::uint64_t seed) const;
  TrueNuisances truth(int quadrature_order = 16) const;

  const Eigen::VectorXd& w_pi0() const { return w_pi0_; }
  const Eigen::VectorXd& w_mu1() const { return w_mu1_; }

 private:
  WorldConfig config_;
  Eigen::VectorXd w_pi0_;  // v + u
  Eigen::VectorXd w_pi_;   // v
  Eigen::VectorXd w_mu1_;  // v + u
  Eigen::MatrixXd w_z_;    // v x z
};

/// Empirical table from (t, d, y1): the fully identified oracle.
VStatTable oracle_table(const OracleSample& sample);

/// delta_value on the oracle table.
double oracle_regret(const OracleSample& sample, const PerformanceMeasure& m);

/// A stand-in for a healthcare enrollment dataset: demographics, prior-year
/// utilisation, a confounded enrollment decision d (~18% selected), a
/// proposed policy t thresholding a linear cost prediction at its 55th
/// percentile, an adverse-outcome label y, and age x race groups.
/// The cost model is fit on 40% of the draw; the other 60% is returned.
struct HealthcareConfig {
  std::size_t n = 4000;
  std::uint64_t seed = 0;
  double threshold_quantile = 0.55;
};

OracleSample healthcare_sample(const HealthcareConfig& config);

}  // namespace regret
