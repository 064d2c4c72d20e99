#include "ringmodel/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ringmodel/errors.hpp"

namespace ringmodel {

double ChebyshevFit::eval(double x) const {
  const double t = x / alpha;
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree(); k >= 1; --k) {
    const double b0 = 2.0 * t * b1 - b2 + cheb[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + cheb[0];
}

double ChebyshevFit::eval_monomial(double x) const {
  double acc = 0.0;
  for (auto it = monomial.rbegin(); it != monomial.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double ChebyshevFit::derivative(double x) const {
  double acc = 0.0;
  for (int k = static_cast<int>(monomial.size()) - 1; k >= 1; --k) acc = acc * x + k * monomial[k];
  return acc;
}

std::vector<double> chebyshev_to_monomial(const std::vector<double>& cheb, double alpha) {
  const std::size_t n = cheb.size();
  // T_k in powers of t, by the three-term recurrence.
  std::vector<std::vector<double>> t(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    t[k].assign(n, 0.0);
    if (k == 0) t[k][0] = 1.0;
    else if (k == 1) t[k][1] = 1.0;
    else
      for (std::size_t j = 0; j < n; ++j) {
        t[k][j] = -t[k - 2][j];
        if (j > 0) t[k][j] += 2.0 * t[k - 1][j - 1];
      }
    for (std::size_t j = 0; j < n; ++j) out[j] += cheb[k] * t[k][j];
  }
  double scale = 1.0;
  for (std::size_t j = 0; j < n; ++j, scale /= alpha) out[j] *= scale;
  return out;
}

ChebyshevFit chebyshev_fit(const std::function<double(double)>& f, double alpha, double max_error,
                           int max_degree, int n_check) {
  if (!(alpha > 0.0)) throw std::invalid_argument("chebyshev_fit: alpha must be > 0");
  if (!(max_error > 0.0)) throw std::invalid_argument("chebyshev_fit: max_error must be > 0");
  // Series coefficients from a high-order Chebyshev-Gauss interpolant.
  const int m = std::max(256, 4 * max_degree);
  std::vector<double> fx(m), theta(m);
  for (int j = 0; j < m; ++j) {
    theta[j] = std::numbers::pi * (j + 0.5) / m;
    fx[j] = f(alpha * std::cos(theta[j]));
  }
  std::vector<double> full(max_degree + 1);
  for (int k = 0; k <= max_degree; ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += fx[j] * std::cos(k * theta[j]);
    full[k] = (k == 0 ? 1.0 : 2.0) * s / m;
  }
  std::vector<double> grid(n_check), fg(n_check);
  for (int i = 0; i < n_check; ++i) {
    grid[i] = -alpha + 2.0 * alpha * i / (n_check - 1);
    fg[i] = f(grid[i]);
  }
  for (int d = 0; d <= max_degree; ++d) {
    ChebyshevFit fit;
    fit.alpha = alpha;
    fit.cheb.assign(full.begin(), full.begin() + d + 1);
    // drop round-off coefficients so that exact low-degree inputs stay exact
    for (double& c : fit.cheb)
      if (std::abs(c) < 1e-14) c = 0.0;
    double err = 0.0;
    for (int i = 0; i < n_check; ++i) err = std::max(err, std::abs(fit.eval(grid[i]) - fg[i]));
    if (err <= max_error) {
      fit.max_error = err;
      fit.monomial = chebyshev_to_monomial(fit.cheb, alpha);
      return fit;
    }
  }
  throw NumericalError("chebyshev_fit: degree cap " + std::to_string(max_degree) +
                       " reached before the requested error");
}

ChebyshevFit chebyshev_fit(SigmoidKind kind, double alpha, double max_error, int max_degree,
                           int n_check) {
  if (kind == SigmoidKind::standard)
    return chebyshev_fit([](double x) { return standard_sigmoid(x); }, alpha, max_error, max_degree,
                         n_check);
  return chebyshev_fit([](double x) { return standard_sigmoid(x) - 0.5; }, alpha, max_error,
                       max_degree, n_check);
}

}  // namespace ringmodel
