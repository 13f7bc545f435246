#include "regret/bounds.hpp"

#include <algorithm>

namespace regret {

namespace {

/// Picks an endpoint of [lo, hi]: the upper one when `high` is set.
double pick(const Interval& iv, bool high) { return high ? iv.upper : iv.lower; }

/// Class-y coordinates p = v_y(1,0), q = v_y(0,0) back to the set's
/// (v_1(1,0), v_1(0,0)). For y = 0 both maps are decreasing.
SetPoint from_class_view(const UncertaintySet& s, int y, double p, double q) {
  if (y == 1) return {p, q};
  return {s.rho10() - p, s.rho00() - q};
}

Interval class_view(const UncertaintySet& s, int y, int t) {
  const Interval h = s.h(t);
  if (y == 1) return h;
  const double rho = s.identified.rho[t][0];
  return {rho - h.upper, rho - h.lower};
}

}  // namespace

Extremes delta_extremes(const UncertaintySet& s, const PerformanceMeasure& m) {
  if (const auto* u = std::get_if<Utility>(&m)) {
    // Linear in v_1(1,0) with slope lambda_11 - lambda_10; v_1(0,0) cancels.
    const bool tilde_y = u->lambda(1, 1) > u->lambda(1, 0);
    return {{pick(s.h10, !tilde_y), s.h00.lower}, {pick(s.h10, tilde_y), s.h00.lower}};
  }
  if (const auto* c = std::get_if<ClassPerf>(&m)) {
    const int y = c->y();
    const Interval p = class_view(s, y, 1);
    const Interval q = class_view(s, y, 0);
    const double vy01 = s.identified.v1[y][0];  // v_y(0,1), identified
    // Increasing in p; in q the sign flips with the numerator p - v_y(0,1).
    const double q_for_max = p.upper - vy01 >= 0.0 ? q.lower : q.upper;
    const double q_for_min = p.lower - vy01 >= 0.0 ? q.upper : q.lower;
    return {from_class_view(s, y, p.lower, q_for_min), from_class_view(s, y, p.upper, q_for_max)};
  }
  const int a = std::get<PredictiveValue>(m).a();
  if (a == 1) {
    // Only v_1(1,0) enters, with positive coefficient psi_1(pi0).
    return {{s.h10.lower, s.h00.lower}, {s.h10.upper, s.h00.lower}};
  }
  // Increasing in v_1(1,0); v_0(0,0) = rho00 - v_1(0,0) enters with sign sigma(0).
  const double sigma = s.identified.rho[1][0] - s.identified.rho[0][1];
  const bool w_high_for_max = sigma < 0.0;
  return {{s.h10.lower, pick(s.h00, !w_high_for_max)}, {s.h10.upper, pick(s.h00, w_high_for_max)}};
}

Extremes policy_extremes(const UncertaintySet& s, Policy policy, const PerformanceMeasure& m) {
  const bool proposed = policy == Policy::proposed;
  if (const auto* u = std::get_if<Utility>(&m)) {
    // Separable linear forms; each coordinate's slope decides its endpoint.
    const double slope10 = proposed ? u->u(1, 1) - u->u(1, 0) : u->u(0, 1) - u->u(0, 0);
    const double slope00 = u->u(0, 1) - u->u(0, 0);
    return {{pick(s.h10, slope10 < 0.0), pick(s.h00, slope00 < 0.0)},
            {pick(s.h10, slope10 >= 0.0), pick(s.h00, slope00 >= 0.0)}};
  }
  if (const auto* c = std::get_if<ClassPerf>(&m)) {
    const int y = c->y();
    const Interval p = class_view(s, y, 1);
    const Interval q = class_view(s, y, 0);
    if (proposed) {
      // (p + v_y(1,1)) / total: increasing in p, decreasing in q.
      return {from_class_view(s, y, p.lower, q.upper), from_class_view(s, y, p.upper, q.lower)};
    }
    // (v_y(0,1) + v_y(1,1)) / total: decreasing in both.
    return {from_class_view(s, y, p.upper, q.upper), from_class_view(s, y, p.lower, q.lower)};
  }
  const int a = std::get<PredictiveValue>(m).a();
  if (a == 1) {
    // Proposed: increasing in v_1(1,0). Status quo: fully identified.
    const double hi = proposed ? s.h10.upper : s.h10.lower;
    return {{s.h10.lower, s.h00.lower}, {hi, s.h00.lower}};
  }
  // NPV numerators hold v_0(0,0) (and v_0(1,0) for the status quo):
  // decreasing in the corresponding v_1 coordinates.
  const double x_min = proposed ? s.h10.lower : s.h10.upper;
  const double x_max = s.h10.lower;
  return {{x_min, s.h00.upper}, {x_max, s.h00.lower}};
}

Interval measure_range(const UncertaintySet& s, Policy policy, const PerformanceMeasure& m) {
  const Extremes e = policy_extremes(s, policy, m);
  return {measure_value(s.at(e.argmin.x10, e.argmin.x00), policy, m),
          measure_value(s.at(e.argmax.x10, e.argmax.x00), policy, m)};
}

RegretInterval delta_interval(const UncertaintySet& s, const PerformanceMeasure& m) {
  const Extremes e = delta_extremes(s, m);
  double lo = delta_value(s.at(e.argmin.x10, e.argmin.x00), m);
  double hi = delta_value(s.at(e.argmax.x10, e.argmax.x00), m);
  if (lo > hi) std::swap(lo, hi);  // only reachable through rounding on flat forms
  return RegretInterval(lo, hi, Method::delta, m);
}

RegretInterval baseline_interval(const UncertaintySet& s, const PerformanceMeasure& m) {
  const Interval proposed = measure_range(s, Policy::proposed, m);
  const Interval status_quo = measure_range(s, Policy::status_quo, m);
  return RegretInterval(proposed.lower - status_quo.upper, proposed.upper - status_quo.lower, Method::baseline, m);
}

double separation_bound(const UncertaintySet& s, const PerformanceMeasure& m) {
  const double alpha = s.h00.width();
  if (const auto* u = std::get_if<Utility>(&m)) return 2.0 * alpha * (u->u(0, 0) + u->u(0, 1));
  if (const auto* c = std::get_if<ClassPerf>(&m)) {
    const int y = c->y();
    const auto& id = s.identified;
    const double v_hi_10 = class_view(s, y, 1).upper;
    const double v_hi_00 = class_view(s, y, 0).upper;
    const double v_01 = id.v1[y][0];
    const double v_11 = id.v1[y][1];
    const double gamma_bar = v_hi_00 + v_hi_10 + v_01 + v_11;
    if (!(gamma_bar > 0.0)) throw NumericError("zero denominator: class absent (gamma_bar = 0)");
    return 2.0 * alpha * v_11 / (gamma_bar * gamma_bar);
  }
  const int a = std::get<PredictiveValue>(m).a();
  if (a == 1) return 0.0;
  const auto& rho = s.identified.rho;
  const double psi_new = rho[0][0] + rho[0][1];
  const double psi_old = rho[0][0] + rho[1][0];
  const double denom = std::max(psi_new, psi_old);
  if (!(denom > 0.0)) throw NumericError("zero denominator: action 0 never taken");
  return 2.0 * alpha / denom;
}

}  // namespace regret
