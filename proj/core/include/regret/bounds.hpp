#pragma once

#include "regret/assumptions.hpp"
#include "regret/types.hpp"

namespace regret {

/// A point (v_1(1,0), v_1(0,0)) of an uncertainty set.
struct SetPoint {
  double x10 = 0.0;
  double x00 = 0.0;
};

/// Where a function of the set attains its extremes.
struct Extremes {
  SetPoint argmin;
  SetPoint argmax;
};

/// Closed-form extreme points of the regret, and of each policy's
/// performance, over the set.
Extremes delta_extremes(const UncertaintySet& set, const PerformanceMeasure& m);
Extremes policy_extremes(const UncertaintySet& set, Policy policy, const PerformanceMeasure& m);

/// [min, max] of m(policy) over the set.
Interval measure_range(const UncertaintySet& set, Policy policy, const PerformanceMeasure& m);

/// Joint bounds on m(proposed) - m(status quo) over the set.
RegretInterval delta_interval(const UncertaintySet& set, const PerformanceMeasure& m);

/// Difference of independently bounded per-policy performance:
/// [min m(pi) - max m(pi0), max m(pi) - min m(pi0)].
RegretInterval baseline_interval(const UncertaintySet& set, const PerformanceMeasure& m);

/// Lower bound on the width gap between baseline and delta intervals.
/// The utility form 2 alpha (u00 + u01) is only a valid lower bound when
/// min(u00, u01) = 0, as for accuracy and misclassification costs.
double separation_bound(const UncertaintySet& set, const PerformanceMeasure& m);

}  // namespace regret
