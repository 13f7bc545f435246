#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "regret/causal_assumption.hpp"
#include "regret/dataset.hpp"
#include "regret/nuisance.hpp"
#include "regret/types.hpp"
#include "regret/vstats.hpp"

namespace regret {

/// Rows whose e0(x) is at or below this floor are flagged for the IV division.
inline constexpr double kPositivityFloor = 1e-3;
/// Fraction of crossed or positivity-flagged rows above which a fold fails.
inline constexpr double kMaxFlaggedFraction = 0.01;

/// One evaluation of the bounding functions at a covariate vector.
struct TauValue {
  double lower = 0.0;
  double upper = 1.0;
  bool clipped = false;     // a raw value fell outside [0, 1]
  bool crossed = false;     // raw lower > raw upper; swapped
  bool positivity = false;  // e0(x) at or below the floor
};

/// Raw bounds before clipping. Sets `positivity` when the row should be
/// flagged; the raw pair is then ignored and (0, 1) used instead.
struct RawTau {
  double lower = 0.0;
  double upper = 1.0;
  bool positivity = false;
};

/// Pointwise bounds on E[Y(1) | D = 0, X = x]. Evaluation clips into [0, 1]
/// and swaps crossed pairs.
class BoundingFunctions {
 public:
  using RawFn = std::function<RawTau(std::span<const double>)>;

  BoundingFunctions(RawFn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}
  static BoundingFunctions constant(double lower, double upper);

  TauValue evaluate(std::span<const double> x) const;
  double tau_lo(std::span<const double> x) const { return evaluate(x).lower; }
  double tau_hi(std::span<const double> x) const { return evaluate(x).upper; }
  const std::string& label() const { return label_; }

 private:
  RawFn fn_;
  std::string label_;
};

BoundingFunctions bounding_functions(const CausalAssumption& assumption, const NuisanceModels& nuisances);

/// Counts gathered while averaging bounding functions over a fold.
struct TauDiagnostics {
  std::size_t rows = 0;
  std::size_t clipped = 0;
  std::size_t crossings = 0;
  std::size_t positivity = 0;

  TauDiagnostics& operator+=(const TauDiagnostics& o);
};

/// The constrained set of partially identified v-statistics: v_1(1,0) in
/// h10 and v_1(0,0) in h00, with v_0(t,0) = rho(t,0) - v_1(t,0).
struct UncertaintySet {
  Interval h10;
  Interval h00;
  IdentifiedVStats identified;

  double rho10() const { return identified.rho[1][0]; }
  double rho00() const { return identified.rho[0][0]; }
  Interval h(int t) const { return t == 1 ? h10 : h00; }
  /// The table at the point (v_1(1,0), v_1(0,0)) = (x10, x00).
  VStatTable at(double x10, double x00) const { return complete_table(identified, x10, x00); }
  /// Throws NumericError unless 0 <= lower <= upper <= rho on both intervals.
  void validate(double tol = 1e-12) const;
};

/// Fold average of pi_t(x) * e0(x) * tau(x) for both bounding functions,
/// clamped into [0, rho_t0]. Throws when crossings or positivity flags
/// exceed kMaxFlaggedFraction of the fold.
Interval plugin_vstat_bound(const ObservationalDataset& fold, const BoundingFunctions& tau,
                            const ProbabilityModel& e1_model, int t, double rho_t0,
                            TauDiagnostics* diagnostics = nullptr);

UncertaintySet map_to_uncertainty_set(const BoundingFunctions& tau, const ProbabilityModel& e1_model,
                                      const ObservationalDataset& fold, const IdentifiedVStats& identified,
                                      TauDiagnostics* diagnostics = nullptr);

/// Lebesgue measure of the set: product of the two interval widths.
double set_size(const UncertaintySet& set);

}  // namespace regret
