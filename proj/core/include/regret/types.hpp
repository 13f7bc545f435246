#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace regret {

/// Error categories double as the CLI exit-code contract.
enum class ErrorKind { config = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Expected utility with a 2x2 table u[a][y] of nonnegative payoffs for
/// taking action a when the outcome is y.
class Utility {
 public:
  Utility(double u00, double u01, double u10, double u11);

  static Utility accuracy() { return {1.0, 0.0, 0.0, 1.0}; }

  /// Expected misclassification cost with costs normalised to sum to one.
  /// `fp_to_fn` is the ratio of the false-positive cost u10 to the
  /// false-negative cost u01.
  static Utility cost(double fp_to_fn);

  double u(int a, int y) const { return u_[a][y]; }
  /// lambda_{ay} = u_{ay} - u_{a'y}
  double lambda(int a, int y) const { return u_[a][y] - u_[1 - a][y]; }

  bool operator==(const Utility&) const = default;

 private:
  std::array<std::array<double, 2>, 2> u_{};
};

/// p(A = 1 | Y(1) = y): TPR for y = 1, FPR for y = 0.
class ClassPerf {
 public:
  explicit ClassPerf(int y);
  int y() const { return y_; }
  bool operator==(const ClassPerf&) const = default;

 private:
  int y_;
};

/// p(Y(1) = a | A = a): PPV for a = 1, NPV for a = 0.
class PredictiveValue {
 public:
  explicit PredictiveValue(int a);
  int a() const { return a_; }
  bool operator==(const PredictiveValue&) const = default;

 private:
  int a_;
};

using PerformanceMeasure = std::variant<Utility, ClassPerf, PredictiveValue>;

/// Short stable identifier ("accuracy", "tpr", "npv", "utility[...]").
std::string measure_name(const PerformanceMeasure& m);

/// Parses names accepted by the CLI: accuracy, tpr, fpr, ppv, npv,
/// cost:<fp_to_fn>, utility:<u00>,<u01>,<u10>,<u11>.
PerformanceMeasure parse_measure(const std::string& text);

/// The five measures used throughout the experiments.
std::array<PerformanceMeasure, 5> standard_measures();

enum class Policy { proposed, status_quo };
enum class Method { delta, baseline };

std::string to_string(Method m);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double v, double tol = 0.0) const { return v >= lower - tol && v <= upper + tol; }
  bool operator==(const Interval&) const = default;
};

/// A partially identified regret interval, optionally with a confidence
/// band around its endpoints.
class RegretInterval {
 public:
  RegretInterval(double lower, double upper, Method method, PerformanceMeasure measure);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double width() const { return upper_ - lower_; }
  Method method() const { return method_; }
  const PerformanceMeasure& measure() const { return measure_; }
  bool contains(double v, double tol = 0.0) const { return v >= lower_ - tol && v <= upper_ + tol; }

  std::optional<double> ci_lower() const { return ci_lower_; }
  std::optional<double> ci_upper() const { return ci_upper_; }
  void set_ci(double ci_lower, double ci_upper);

 private:
  double lower_;
  double upper_;
  Method method_;
  PerformanceMeasure measure_;
  std::optional<double> ci_lower_;
  std::optional<double> ci_upper_;
};

}  // namespace regret
