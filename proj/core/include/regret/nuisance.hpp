#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "regret/causal_assumption.hpp"
#include "regret/dataset.hpp"

namespace regret {

/// Probabilities emitted by fitted learners are floored into
/// [kProbabilityFloor, 1 - kProbabilityFloor].
inline constexpr double kProbabilityFloor = 1e-3;

/// Instrument levels with fewer rows than this get no per-level model.
inline constexpr std::size_t kMinLevelRows = 20;

double floor_probability(double p);

/// A fitted map from a covariate vector to a probability.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  virtual double predict(std::span<const double> x) const = 0;
  std::vector<double> predict_all(const ObservationalDataset& data) const;
};

using ModelPtr = std::shared_ptr<const ProbabilityModel>;

class ConstantModel final : public ProbabilityModel {
 public:
  explicit ConstantModel(double p) : p_(p) {}
  double predict(std::span<const double>) const override { return p_; }
  double probability() const { return p_; }

 private:
  double p_;
};

/// L2-regularised logistic regression on standardised features with an
/// unpenalised intercept.
class LogisticModel final : public ProbabilityModel {
 public:
  LogisticModel(Eigen::VectorXd coef, double intercept, Eigen::VectorXd mean, Eigen::VectorXd scale,
                int iterations, bool converged)
      : coef_(std::move(coef)),
        intercept_(intercept),
        mean_(std::move(mean)),
        scale_(std::move(scale)),
        iterations_(iterations),
        converged_(converged) {}

  double predict(std::span<const double> x) const override;
  double logit(std::span<const double> x) const;

  const Eigen::VectorXd& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }
  int iterations() const { return iterations_; }
  bool converged() const { return converged_; }

 private:
  Eigen::VectorXd coef_;
  double intercept_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  int iterations_;
  bool converged_;
};

/// Laplace-smoothed label frequency within equal-mass bins of one column.
class HistogramModel final : public ProbabilityModel {
 public:
  HistogramModel(std::size_t column, std::vector<double> edges, std::vector<double> probs)
      : column_(column), edges_(std::move(edges)), probs_(std::move(probs)) {}
  double predict(std::span<const double> x) const override;

 private:
  std::size_t column_;
  std::vector<double> edges_;  // interior cut points, ascending
  std::vector<double> probs_;  // edges_.size() + 1 bins
};

/// Wraps a known probability function (oracle nuisances, tests).
/// Outputs are not floored.
class FunctionModel final : public ProbabilityModel {
 public:
  explicit FunctionModel(std::function<double(std::span<const double>)> fn) : fn_(std::move(fn)) {}
  double predict(std::span<const double> x) const override { return fn_(x); }

 private:
  std::function<double(std::span<const double>)> fn_;
};

enum class Learner { logistic, histogram };

struct ClassifierConfig {
  Learner learner = Learner::logistic;
  std::optional<double> l2_penalty;  // default 1/n
  int max_iter = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
  std::size_t score_column = 0;
  /// Instrument-level models: one fit on x plus level indicators (pooled)
  /// or an independent fit per level subset.
  bool pooled_levels = true;
};

Learner parse_learner(const std::string& name);

/// Fits p(label = 1 | x). With fewer than two rows or a single observed
/// label the result is the constant (sum(label) + 1) / (n + 2).
ModelPtr fit_classifier(const RowMatrix& x, std::span<const std::uint8_t> labels,
                        const ClassifierConfig& config);

/// Per-instrument-level models: e1(x, z) and mu1(x, z).
struct LevelModels {
  ModelPtr e1;
  ModelPtr mu1;
};

/// Conditional frequency ratios eta1(w, z) / (eta1(w) eta1(z)) within D = 1,
/// stratified by equal-mass bins of the fitted mu1(x).
struct ProximalFrequencies {
  std::vector<double> edges;      // interior cut points on mu1(x)
  std::vector<double> ratio_min;  // per bin
  std::vector<double> ratio_max;  // per bin

  std::size_t bin(double score) const;
};

inline constexpr std::size_t kProximalBins = 10;
inline constexpr std::size_t kMinProximalCell = 5;

struct NuisanceModels {
  ModelPtr e1;   // p(D = 1 | X = x)
  ModelPtr mu1;  // E[Y | D = 1, X = x]
  std::map<int, LevelModels> per_level;
  std::optional<ProximalFrequencies> proximal;
  std::vector<std::string> warnings;
};

/// Fits every nuisance the assumption needs on `train`.
NuisanceModels fit_nuisances(const ObservationalDataset& train, const CausalAssumption& assumption,
                             const ClassifierConfig& config);

}  // namespace regret
