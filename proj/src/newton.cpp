#include "ringmodel/newton.hpp"

#include <Eigen/LU>

#include "ringmodel/errors.hpp"

namespace ringmodel {

std::string to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::converged: return "converged";
    case NewtonStatus::max_iterations: return "max_iterations";
    case NewtonStatus::singular: return "singular_jacobian";
    case NewtonStatus::line_search_failed: return "line_search_failed";
    case NewtonStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

Mat fd_jacobian(const VectorFn& f, const Vec& x, double fd_step) {
  const double h = fd_step * (1.0 + x.norm());
  Vec xp = x, xm = x;
  Mat jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    const Vec col = (f(xp) - f(xm)) / (2.0 * h);
    if (j == 0) jac.resize(col.size(), x.size());
    jac.col(j) = col;
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

NewtonResult newton_solve(const VectorFn& f, const Vec& guess, const NewtonConfig& cfg,
                          const MatrixFn& jac) {
  NewtonResult res;
  res.x = guess;
  Vec r = f(res.x);
  if (!r.allFinite()) {
    res.status = NewtonStatus::non_finite;
    return res;
  }
  res.residual_norm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it <= cfg.max_iters; ++it) {
    res.iterations = it;
    if (res.residual_norm <= cfg.tol) {
      res.status = NewtonStatus::converged;
      return res;
    }
    if (it == cfg.max_iters) break;
    const Mat j = jac ? jac(res.x) : fd_jacobian(f, res.x, cfg.fd_step);
    Eigen::FullPivLU<Mat> lu(j);
    if (!j.allFinite() || lu.rcond() < cfg.rcond_min) {
      res.status = NewtonStatus::singular;
      return res;
    }
    const Vec dx = lu.solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
      const Vec trial = res.x + alpha * dx;
      const Vec rt = f(trial);
      if (!rt.allFinite()) continue;
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (nt < res.residual_norm) {
        res.x = trial;
        r = rt;
        res.residual_norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = NewtonStatus::line_search_failed;
      return res;
    }
  }
  res.status = NewtonStatus::max_iterations;
  return res;
}

Vec newton_solve_or_throw(const VectorFn& f, const Vec& guess, const NewtonConfig& cfg,
                          const MatrixFn& jac) {
  const NewtonResult res = newton_solve(f, guess, cfg, jac);
  if (!res.converged())
    throw NumericalError("Newton failed (" + to_string(res.status) + "), residual " +
                         std::to_string(res.residual_norm));
  return res.x;
}

}  // namespace ringmodel
