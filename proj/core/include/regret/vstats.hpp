#pragma once

#include <array>

#include "regret/dataset.hpp"
#include "regret/types.hpp"

namespace regret {

/// The eight joint probabilities v_y(t, d) = p(T = t, D = d, Y(1) = y).
/// T is the proposed policy's action, D the status quo's. The cell mass
/// rho(t, d) = v_0(t, d) + v_1(t, d).
class VStatTable {
 public:
  VStatTable() = default;

  double v(int y, int t, int d) const { return cells_[index(y, t, d)]; }
  void set(int y, int t, int d, double value) { cells_[index(y, t, d)] = value; }
  double rho(int t, int d) const { return v(0, t, d) + v(1, t, d); }
  double total() const;

  /// Throws NumericError if an entry is negative or the table does not
  /// sum to one within `tol`.
  void validate(double tol = 1e-12) const;

  /// Empirical table from realized actions and fully observed outcomes.
  static VStatTable from_counts(std::span<const std::uint8_t> t, std::span<const std::uint8_t> d,
                                std::span<const std::uint8_t> y);

 private:
  static constexpr int index(int y, int t, int d) { return 4 * y + 2 * t + d; }
  std::array<double, 8> cells_{};
};

/// The identified half: v_y(t, 1) plus all four cell masses rho(t, d).
struct IdentifiedVStats {
  std::array<std::array<double, 2>, 2> v1{};   // [y][t] = v_y(t, 1)
  std::array<std::array<double, 2>, 2> rho{};  // [t][d]

  double v(int y, int t) const { return v1[y][t]; }
};

/// Sample averages of pi_t(x_i) * 1{d_i = 1, y_i = y} and pi_t(x_i) * 1{d_i = d}.
/// A deterministic proposed policy (pi1 in {0,1}) reduces this to counting.
IdentifiedVStats estimate_identified(const ObservationalDataset& data);

/// Completes the identified half with v_1(1,0) and v_1(0,0); the y = 0
/// entries of the d = 0 cells follow from the cell masses.
VStatTable complete_table(const IdentifiedVStats& id, double v1_10, double v1_00);

/// m(v; policy). Throws NumericError when the measure's denominator is zero.
double measure_value(const VStatTable& v, Policy policy, const PerformanceMeasure& m);

/// The regret m(v; proposed) - m(v; status quo) through the reduced
/// decompositions in which the agreement cells cancel.
double delta_value(const VStatTable& v, const PerformanceMeasure& m);

}  // namespace regret
