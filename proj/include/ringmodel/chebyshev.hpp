#pragma once

#include <functional>
#include <vector>

#include "ringmodel/model.hpp"

namespace ringmodel {

/// Truncated Chebyshev series P(x) = sum_k c_k T_k(x / alpha) on [-alpha, alpha].
struct ChebyshevFit {
  std::vector<double> cheb;      // c_0 .. c_d
  std::vector<double> monomial;  // the same polynomial in powers of x
  double alpha = 1.0;
  double max_error = 0.0;  // sup |f - P| on the check grid

  int degree() const { return static_cast<int>(cheb.size()) - 1; }
  double eval(double x) const;            // Clenshaw
  double derivative(double x) const;      // from the monomial form
  double eval_monomial(double x) const;   // Horner
};

/// Smallest-degree truncation whose sup error on an n_check-point uniform
/// grid is <= max_error. Throws NumericalError past max_degree.
ChebyshevFit chebyshev_fit(const std::function<double(double)>& f, double alpha, double max_error,
                           int max_degree = 80, int n_check = 10000);

/// Fit of the sigmoid of the given kind (S for standard, S0 otherwise).
ChebyshevFit chebyshev_fit(SigmoidKind kind, double alpha, double max_error, int max_degree = 80,
                           int n_check = 10000);

/// Power-basis coefficients of sum_k c_k T_k(x / alpha).
std::vector<double> chebyshev_to_monomial(const std::vector<double>& cheb, double alpha);

}  // namespace ringmodel
