#pragma once

#include <vector>

namespace ringmodel {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes mapped onto [a, b]. Nodes are
/// returned in increasing order and are exactly symmetric about (a+b)/2.
QuadratureRule gauss_legendre(int order, double a, double b);

}  // namespace ringmodel
