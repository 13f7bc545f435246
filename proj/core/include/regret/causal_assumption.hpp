#pragma once

#include <string>
#include <variant>

namespace regret {

/// No assumption: tau = (0, 1).
struct Manski {};

/// Marginal sensitivity model with odds-ratio bound lambda >= 1.
struct Msm {
  double lambda = 1.0;
};

/// Rosenbaum's Gamma model, relaxed to Msm{gamma}.
struct RosenbaumGamma {
  double gamma = 1.0;
};

/// Finite-valued instrument.
struct InstrumentalVariable {
  std::string z_column;
};

/// Treatment-confounding proxy Z.
struct ProximalTreatment {
  std::string z_column;
};

/// Treatment-confounding proxy Z plus outcome-confounding proxy W.
struct ProximalTreatmentOutcome {
  std::string z_column;
  std::string w_column;
};

using CausalAssumption = std::variant<Manski, Msm, RosenbaumGamma, InstrumentalVariable,
                                      ProximalTreatment, ProximalTreatmentOutcome>;

/// Validates parameters (lambda >= 1, gamma >= 1, nonempty column names).
CausalAssumption make_assumption(const std::string& kind, double lambda = 1.0, double gamma = 1.0,
                                 const std::string& z_column = {}, const std::string& w_column = {});

/// Config key for the assumption: manski, msm, rosenbaum, iv, proximal_t, proximal_tw.
std::string assumption_key(const CausalAssumption& a);
std::string describe(const CausalAssumption& a);

bool needs_instrument(const CausalAssumption& a);
bool is_msm_family(const CausalAssumption& a);
/// The MSM odds-ratio bound (Gamma for Rosenbaum). Throws for other kinds.
double msm_lambda(const CausalAssumption& a);

}  // namespace regret
