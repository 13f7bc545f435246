#include "regret/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regret {

// ---- assumption variant helpers ----

CausalAssumption make_assumption(const std::string& kind, double lambda, double gamma,
                                 const std::string& z_column, const std::string& w_column) {
  auto need = [&](const std::string& col, const char* what) {
    if (col.empty()) throw ConfigError("assumption '" + kind + "' requires " + what);
  };
  if (kind == "manski") return Manski{};
  if (kind == "msm") {
    if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite value >= 1");
    return Msm{lambda};
  }
  if (kind == "rosenbaum") {
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be a finite value >= 1");
    return RosenbaumGamma{gamma};
  }
  if (kind == "iv") {
    need(z_column, "z_column");
    return InstrumentalVariable{z_column};
  }
  if (kind == "proximal_t") {
    need(z_column, "z_column");
    return ProximalTreatment{z_column};
  }
  if (kind == "proximal_tw") {
    need(z_column, "z_column");
    need(w_column, "w_column");
    return ProximalTreatmentOutcome{z_column, w_column};
  }
  throw ConfigError("unknown assumption '" + kind + "'");
}

std::string assumption_key(const CausalAssumption& a) {
  static constexpr const char* keys[] = {"manski", "msm", "rosenbaum", "iv", "proximal_t", "proximal_tw"};
  return keys[a.index()];
}

std::string describe(const CausalAssumption& a) {
  if (const auto* m = std::get_if<Msm>(&a)) return "msm(lambda=" + format_double(m->lambda) + ")";
  if (const auto* r = std::get_if<RosenbaumGamma>(&a)) return "rosenbaum(gamma=" + format_double(r->gamma) + ")";
  if (const auto* iv = std::get_if<InstrumentalVariable>(&a)) return "iv(z=" + iv->z_column + ")";
  if (const auto* p = std::get_if<ProximalTreatment>(&a)) return "proximal_t(z=" + p->z_column + ")";
  if (const auto* p = std::get_if<ProximalTreatmentOutcome>(&a)) {
    return "proximal_tw(z=" + p->z_column + ", w=" + p->w_column + ")";
  }
  return "manski";
}

bool needs_instrument(const CausalAssumption& a) {
  return std::holds_alternative<InstrumentalVariable>(a) || std::holds_alternative<ProximalTreatment>(a) ||
         std::holds_alternative<ProximalTreatmentOutcome>(a);
}

bool is_msm_family(const CausalAssumption& a) {
  return std::holds_alternative<Msm>(a) || std::holds_alternative<RosenbaumGamma>(a);
}

double msm_lambda(const CausalAssumption& a) {
  if (const auto* m = std::get_if<Msm>(&a)) return m->lambda;
  if (const auto* r = std::get_if<RosenbaumGamma>(&a)) return r->gamma;
  throw ConfigError("assumption " + describe(a) + " has no MSM parameter");
}

// ---- bounding functions ----

BoundingFunctions BoundingFunctions::constant(double lower, double upper) {
  return BoundingFunctions([lower, upper](std::span<const double>) { return RawTau{lower, upper, false}; },
                           "constant");
}

TauValue BoundingFunctions::evaluate(std::span<const double> x) const {
  const RawTau raw = fn_(x);
  TauValue out;
  if (raw.positivity) {
    out.positivity = true;
    return out;  // (0, 1): no information at this x
  }
  if (!std::isfinite(raw.lower) || !std::isfinite(raw.upper)) {
    throw NumericError("bounding function evaluated to a non-finite value (" + label_ + ")");
  }
  out.lower = std::clamp(raw.lower, 0.0, 1.0);
  out.upper = std::clamp(raw.upper, 0.0, 1.0);
  out.clipped = out.lower != raw.lower || out.upper != raw.upper;
  if (out.lower > out.upper) {
    std::swap(out.lower, out.upper);
    out.crossed = true;
  }
  return out;
}

BoundingFunctions bounding_functions(const CausalAssumption& assumption, const NuisanceModels& nuisances) {
  const ModelPtr mu1 = nuisances.mu1;
  const ModelPtr e1 = nuisances.e1;

  if (std::holds_alternative<Manski>(assumption)) {
    return BoundingFunctions([](std::span<const double>) { return RawTau{0.0, 1.0, false}; }, "manski");
  }
  if (is_msm_family(assumption)) {
    const double lambda = msm_lambda(assumption);
    return BoundingFunctions(
        [mu1, lambda](std::span<const double> x) {
          const double m = mu1->predict(x);
          return RawTau{m / lambda, std::min(1.0, lambda * m), false};
        },
        describe(assumption));
  }
  if (std::holds_alternative<InstrumentalVariable>(assumption)) {
    if (nuisances.per_level.empty()) throw DataError("instrument level with zero support");
    auto levels = nuisances.per_level;
    return BoundingFunctions(
        [mu1, e1, levels](std::span<const double> x) {
          const double e1x = e1->predict(x);
          const double e0x = 1.0 - e1x;
          if (e0x <= kPositivityFloor) return RawTau{0.0, 1.0, true};
          double lo = -std::numeric_limits<double>::infinity();
          double hi = std::numeric_limits<double>::infinity();
          for (const auto& [z, m] : levels) {
            const double joint = m.mu1->predict(x) * m.e1->predict(x);
            lo = std::max(lo, joint);
            hi = std::min(hi, (1.0 - m.e1->predict(x)) + joint);
          }
          const double observed = mu1->predict(x) * e1x;
          return RawTau{(lo - observed) / e0x, (hi - observed) / e0x, false};
        },
        describe(assumption));
  }
  if (std::holds_alternative<ProximalTreatment>(assumption)) {
    if (nuisances.per_level.empty()) throw DataError("instrument level with zero support");
    auto levels = nuisances.per_level;
    return BoundingFunctions(
        [levels](std::span<const double> x) {
          double lo = 1.0, hi = 0.0;
          for (const auto& [z, m] : levels) {
            const double v = m.mu1->predict(x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
          return RawTau{lo, hi, false};
        },
        describe(assumption));
  }
  if (!nuisances.proximal) throw DataError("proximal frequency tables were not fitted");
  const ProximalFrequencies freqs = *nuisances.proximal;
  return BoundingFunctions(
      [mu1, freqs](std::span<const double> x) {
        const double m = mu1->predict(x);
        const std::size_t b = freqs.bin(m);
        return RawTau{m * freqs.ratio_min[b], m * freqs.ratio_max[b], false};
      },
      describe(assumption));
}

TauDiagnostics& TauDiagnostics::operator+=(const TauDiagnostics& o) {
  rows += o.rows;
  clipped += o.clipped;
  crossings += o.crossings;
  positivity += o.positivity;
  return *this;
}

void UncertaintySet::validate(double tol) const {
  for (int t = 0; t < 2; ++t) {
    const Interval iv = h(t);
    const double rho = identified.rho[t][0];
    if (!(iv.lower >= -tol && iv.lower <= iv.upper + tol && iv.upper <= rho + tol)) {
      throw NumericError("uncertainty set interval for v_1(" + std::to_string(t) +
                         ",0) is not inside [0, rho_" + std::to_string(t) + "0]");
    }
  }
}

namespace {

struct FoldSums {
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  TauDiagnostics diag;
};

FoldSums accumulate(const ObservationalDataset& fold, const BoundingFunctions& tau,
                    const ProbabilityModel& e1_model) {
  if (fold.size() == 0) throw DataError("empty fold");
  FoldSums s;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    const auto x = fold.x(i);
    const TauValue v = tau.evaluate(x);
    const double e0 = 1.0 - e1_model.predict(x);
    for (int t = 0; t < 2; ++t) {
      const double w = fold.pi(i, t) * e0;
      s.lo[t] += w * v.lower;
      s.hi[t] += w * v.upper;
    }
    ++s.diag.rows;
    s.diag.clipped += v.clipped;
    s.diag.crossings += v.crossed;
    s.diag.positivity += v.positivity;
  }
  const double n = static_cast<double>(fold.size());
  for (int t = 0; t < 2; ++t) {
    s.lo[t] /= n;
    s.hi[t] /= n;
  }
  const double limit = kMaxFlaggedFraction * n;
  if (static_cast<double>(s.diag.crossings) > limit) {
    throw NumericError("bounding functions crossed on " + std::to_string(s.diag.crossings) + " of " +
                       std::to_string(fold.size()) + " rows (" + tau.label() + ")");
  }
  if (static_cast<double>(s.diag.positivity) > limit) {
    throw NumericError("positivity failure: e0(x) <= " + format_double(kPositivityFloor) + " on " +
                       std::to_string(s.diag.positivity) + " of " + std::to_string(fold.size()) + " rows");
  }
  return s;
}

Interval clamp_to_cell(double lo, double hi, double rho) {
  const double cap = std::max(rho, 0.0);
  return {std::clamp(lo, 0.0, cap), std::clamp(hi, 0.0, cap)};
}

}  // namespace

Interval plugin_vstat_bound(const ObservationalDataset& fold, const BoundingFunctions& tau,
                            const ProbabilityModel& e1_model, int t, double rho_t0, TauDiagnostics* diagnostics) {
  const FoldSums s = accumulate(fold, tau, e1_model);
  if (diagnostics) *diagnostics += s.diag;
  return clamp_to_cell(s.lo[t], s.hi[t], rho_t0);
}

UncertaintySet map_to_uncertainty_set(const BoundingFunctions& tau, const ProbabilityModel& e1_model,
                                      const ObservationalDataset& fold, const IdentifiedVStats& identified,
                                      TauDiagnostics* diagnostics) {
  const FoldSums s = accumulate(fold, tau, e1_model);
  if (diagnostics) *diagnostics += s.diag;
  UncertaintySet set;
  set.identified = identified;
  set.h10 = clamp_to_cell(s.lo[1], s.hi[1], identified.rho[1][0]);
  set.h00 = clamp_to_cell(s.lo[0], s.hi[0], identified.rho[0][0]);
  return set;
}

double set_size(const UncertaintySet& set) { return set.h10.width() * set.h00.width(); }

}  // namespace regret
