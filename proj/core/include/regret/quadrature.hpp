#pragma once

#include <vector>

namespace regret {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to one
};

/// Nodes and weights integrating E[f(Z)] for Z ~ N(0, 1), exact for
/// polynomials of degree < 2n.
QuadratureRule gauss_hermite_normal(int n);

}  // namespace regret
