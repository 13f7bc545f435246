#include "regret/vstats.hpp"

#include <cmath>

namespace regret {

double VStatTable::total() const {
  double s = 0.0;
  for (double c : cells_) s += c;
  return s;
}

void VStatTable::validate(double tol) const {
  for (double c : cells_) {
    if (!(c >= -tol)) throw NumericError("v-statistic table has a negative entry");
  }
  if (std::abs(total() - 1.0) > tol) throw NumericError("v-statistic table does not sum to one");
}

VStatTable VStatTable::from_counts(std::span<const std::uint8_t> t, std::span<const std::uint8_t> d,
                                   std::span<const std::uint8_t> y) {
  if (t.size() != d.size() || t.size() != y.size() || t.empty()) {
    throw DataError("from_counts needs equal-length nonempty columns");
  }
  std::array<std::size_t, 8> counts{};
  for (std::size_t i = 0; i < t.size(); ++i) ++counts[index(y[i], t[i], d[i])];
  VStatTable out;
  const double n = static_cast<double>(t.size());
  for (std::size_t k = 0; k < 8; ++k) out.cells_[k] = static_cast<double>(counts[k]) / n;
  return out;
}

IdentifiedVStats estimate_identified(const ObservationalDataset& data) {
  IdentifiedVStats out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int d = data.d(i);
    for (int t = 0; t < 2; ++t) {
      const double w = data.pi(i, t);
      out.rho[t][d] += w;
      if (d == 1) out.v1[data.y(i)][t] += w;
    }
  }
  const double n = static_cast<double>(data.size());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      out.v1[a][b] /= n;
      out.rho[a][b] /= n;
    }
  }
  return out;
}

VStatTable complete_table(const IdentifiedVStats& id, double v1_10, double v1_00) {
  VStatTable v;
  for (int y = 0; y < 2; ++y) {
    for (int t = 0; t < 2; ++t) v.set(y, t, 1, id.v1[y][t]);
  }
  v.set(1, 1, 0, v1_10);
  v.set(0, 1, 0, id.rho[1][0] - v1_10);
  v.set(1, 0, 0, v1_00);
  v.set(0, 0, 0, id.rho[0][0] - v1_00);
  return v;
}

namespace {

void require_positive(double denom, const char* what) {
  if (!(denom > 0.0)) throw NumericError(std::string("zero denominator: ") + what);
}

}  // namespace

double measure_value(const VStatTable& v, Policy policy, const PerformanceMeasure& m) {
  // act(t, d) is the action the evaluated policy takes in cell (t, d).
  const bool proposed = policy == Policy::proposed;
  auto act = [proposed](int t, int d) { return proposed ? t : d; };

  if (const auto* u = std::get_if<Utility>(&m)) {
    double s = 0.0;
    for (int y = 0; y < 2; ++y)
      for (int t = 0; t < 2; ++t)
        for (int d = 0; d < 2; ++d) s += u->u(act(t, d), y) * v.v(y, t, d);
    return s;
  }
  if (const auto* c = std::get_if<ClassPerf>(&m)) {
    const int y = c->y();
    double num = 0.0, den = 0.0;
    for (int t = 0; t < 2; ++t)
      for (int d = 0; d < 2; ++d) {
        den += v.v(y, t, d);
        if (act(t, d) == 1) num += v.v(y, t, d);
      }
    require_positive(den, "class absent (p(Y(1)=y) = 0)");
    return num / den;
  }
  const int a = std::get<PredictiveValue>(m).a();
  double num = 0.0, den = 0.0;
  for (int t = 0; t < 2; ++t)
    for (int d = 0; d < 2; ++d) {
      if (act(t, d) != a) continue;
      den += v.rho(t, d);
      num += v.v(a, t, d);
    }
  require_positive(den, "action never taken (psi_a = 0)");
  return num / den;
}

double delta_value(const VStatTable& v, const PerformanceMeasure& m) {
  if (const auto* u = std::get_if<Utility>(&m)) {
    // Only the disagreement cells (a, a') survive the difference.
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int y = 0; y < 2; ++y) s += u->lambda(a, y) * v.v(y, a, 1 - a);
    return s;
  }
  if (const auto* c = std::get_if<ClassPerf>(&m)) {
    const int y = c->y();
    const double den = v.v(y, 0, 0) + v.v(y, 1, 0) + v.v(y, 0, 1) + v.v(y, 1, 1);
    require_positive(den, "class absent (p(Y(1)=y) = 0)");
    return (v.v(y, 1, 0) - v.v(y, 0, 1)) / den;
  }
  const int a = std::get<PredictiveValue>(m).a();
  const int b = 1 - a;
  const double psi_new = v.rho(a, a) + v.rho(a, b);  // p(T = a)
  const double psi_old = v.rho(a, a) + v.rho(b, a);  // p(D = a)
  require_positive(psi_new, "proposed policy never takes the action");
  require_positive(psi_old, "status quo never takes the action");
  const double sigma = (1 - 2 * a) * (v.rho(1, 0) - v.rho(0, 1));
  return (sigma * v.v(a, a, a) + psi_old * v.v(a, a, b) - psi_new * v.v(a, b, a)) /
         (psi_new * psi_old);
}

}  // namespace regret
