#pragma once

#include <functional>
#include <string>

#include "ringmodel/model.hpp"

namespace ringmodel {

using VectorFn = std::function<Vec(const Vec&)>;
using MatrixFn = std::function<Mat(const Vec&)>;

struct NewtonConfig {
  double tol = 1e-10;       // on the max-norm of the residual
  int max_iters = 50;
  int max_halvings = 30;
  double fd_step = 1e-6;    // relative central-difference step
  double rcond_min = 1e-14; // reciprocal condition estimate treated as singular
};

enum class NewtonStatus { converged, max_iterations, singular, line_search_failed, non_finite };

std::string to_string(NewtonStatus status);

struct NewtonResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  NewtonStatus status = NewtonStatus::max_iterations;

  bool converged() const { return status == NewtonStatus::converged; }
};

/// Central-difference Jacobian, h = fd_step (1 + |x|).
Mat fd_jacobian(const VectorFn& f, const Vec& x, double fd_step = 1e-6);

/// Damped Newton: full step, halved until the residual max-norm decreases.
/// `jac` may be empty, in which case the finite-difference Jacobian is used.
NewtonResult newton_solve(const VectorFn& f, const Vec& guess, const NewtonConfig& cfg = {},
                          const MatrixFn& jac = {});

/// Same as newton_solve but throws NumericalError unless it converges.
Vec newton_solve_or_throw(const VectorFn& f, const Vec& guess, const NewtonConfig& cfg = {},
                          const MatrixFn& jac = {});

}  // namespace ringmodel
