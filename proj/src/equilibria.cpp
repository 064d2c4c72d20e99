#include "ringmodel/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "ringmodel/errors.hpp"

namespace ringmodel {

std::string to_string(Chart chart) { return chart == Chart::full ? "full" : "symmetric"; }

std::string to_string(Param param) {
  switch (param) {
    case Param::gain: return "lambda";
    case Param::contrast: return "epsilon";
    case Param::threshold: return "theta";
    case Param::mu: return "mu";
  }
  return "lambda";
}

Param param_from_string(const std::string& name) {
  if (name == "lambda" || name == "gain") return Param::gain;
  if (name == "epsilon" || name == "contrast") return Param::contrast;
  if (name == "theta" || name == "threshold") return Param::threshold;
  if (name == "mu") return Param::mu;
  throw std::invalid_argument("unknown continuation parameter '" + name + "'");
}

DriveFrame DriveSpec::frame(const ModelSpec& spec) const {
  return lgn_frame(beta, x0, epsilon, spec, second_mode_ratio);
}

EquilibriumProblem::EquilibriumProblem(ModelSpec spec, DriveSpec drive, Chart chart)
    : model_(std::move(spec)), drive_(drive), frame_(drive.frame(model_.spec())), chart_(chart) {
  if (chart_ == Chart::symmetric)
    for (const auto& ik : frame_.ik)
      if (ik.imag() != 0.0)
        throw std::invalid_argument("symmetric chart needs a real drive (x0 = 0 or pi/2)");
}

int EquilibriumProblem::dimension() const {
  return chart_ == Chart::full ? model_.dimension() : 1 + model_.n_modes();
}

double EquilibriumProblem::get(Param p) const {
  switch (p) {
    case Param::gain: return spec().gain;
    case Param::contrast: return drive_.epsilon;
    case Param::threshold: return spec().threshold;
    case Param::mu: return spec().homotopy_mu;
  }
  return 0.0;
}

EquilibriumProblem EquilibriumProblem::with(Param p, double value) const {
  EquilibriumProblem out = *this;
  switch (p) {
    case Param::gain: out.model_ = model_.with_gain(value); break;
    case Param::contrast:
      out.drive_.epsilon = value;
      out.frame_.contrast = value;
      break;
    case Param::threshold: out.model_ = model_.with_threshold(value); break;
    case Param::mu: out.model_ = model_.with_mu(value); break;
  }
  return out;
}

Vec EquilibriumProblem::residual(const Vec& u) const {
  return chart_ == Chart::full ? model_.rhs(u, frame_) : model_.symmetric_rhs(u, frame_);
}

Mat EquilibriumProblem::jacobian(const Vec& u) const {
  return chart_ == Chart::full ? model_.jacobian(u) : model_.symmetric_jacobian(u);
}

Vec EquilibriumProblem::param_derivative(const Vec& u, Param p, double h) const {
  const double v = get(p);
  const double step = h * (1.0 + std::abs(v));
  return (with(p, v + step).residual(u) - with(p, v - step).residual(u)) / (2.0 * step);
}

Vec EquilibriumProblem::encode(const CortexState& s) const {
  return chart_ == Chart::full ? s.to_vector() : s.to_symmetric_chart();
}

CortexState EquilibriumProblem::decode(const Vec& u) const {
  return chart_ == Chart::full ? CortexState::from_vector(u) : CortexState::from_symmetric_chart(u);
}

std::vector<std::string> EquilibriumProblem::state_names() const {
  std::vector<std::string> names{"v0"};
  for (int k = 1; k <= model_.n_modes(); ++k) {
    names.push_back("re_z" + std::to_string(k));
    if (chart_ == Chart::full) names.push_back("im_z" + std::to_string(k));
  }
  return names;
}

StabilityReport stability_from_jacobian(const Mat& jac, double margin) {
  Eigen::EigenSolver<Mat> es(jac, false);
  StabilityReport r;
  r.eigenvalues = es.eigenvalues();
  r.leading_real_part = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    const double re = r.eigenvalues(i).real();
    r.leading_real_part = std::max(r.leading_real_part, re);
    if (re > margin) ++r.n_unstable;
  }
  return r;
}

StabilityReport stability(const EquilibriumProblem& problem, const Vec& u,
                          const StabilityOptions& opts) {
  const double res = problem.residual(u).lpNorm<Eigen::Infinity>();
  if (res > 10.0 * opts.newton_tol)
    throw std::invalid_argument("stability: state is not an equilibrium (residual " +
                                std::to_string(res) + ")");
  const Mat jac = opts.finite_difference
                      ? fd_jacobian([&](const Vec& x) { return problem.residual(x); }, u, opts.fd_step)
                      : problem.jacobian(u);
  return stability_from_jacobian(jac, opts.margin);
}

StabilityReport stability(const GalerkinModel& model, const CortexState& state,
                          const DriveFrame& drive, const StabilityOptions& opts) {
  const Vec u = state.to_vector();
  const double res = model.rhs(u, drive).lpNorm<Eigen::Infinity>();
  if (res > 10.0 * opts.newton_tol)
    throw std::invalid_argument("stability: state is not an equilibrium (residual " +
                                std::to_string(res) + ")");
  const Mat jac = opts.finite_difference
                      ? fd_jacobian([&](const Vec& x) { return model.rhs(x, drive); }, u, opts.fd_step)
                      : model.jacobian(u);
  return stability_from_jacobian(jac, opts.margin);
}

NewtonResult solve_equilibrium(const EquilibriumProblem& problem, const Vec& guess,
                               const NewtonConfig& cfg) {
  return newton_solve([&](const Vec& u) { return problem.residual(u); }, guess, cfg,
                      [&](const Vec& u) { return problem.jacobian(u); });
}

std::vector<Vec> enumerate_equilibria(const EquilibriumProblem& problem,
                                      const std::vector<Vec>& seeds, const NewtonConfig& cfg,
                                      double dedupe_radius) {
  std::vector<Vec> found;
  for (const auto& s : seeds) {
    const NewtonResult r = solve_equilibrium(problem, s, cfg);
    if (!r.converged()) continue;
    const bool dup = std::any_of(found.begin(), found.end(), [&](const Vec& f) {
      return (f - r.x).norm() <= dedupe_radius;
    });
    if (!dup) found.push_back(r.x);
  }
  std::sort(found.begin(), found.end(), [](const Vec& a, const Vec& b) {
    return a(0) != b(0) ? a(0) < b(0) : a(1) < b(1);
  });
  return found;
}

std::vector<Vec> seed_grid(const EquilibriumProblem& problem, double v0_lo, double v0_hi,
                           double a_lo, double a_hi, int n) {
  if (n < 2) throw std::invalid_argument("seed_grid: n must be >= 2");
  std::vector<Vec> seeds;
  seeds.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec u = Vec::Zero(problem.dimension());
      u(0) = v0_lo + (v0_hi - v0_lo) * i / (n - 1);
      u(1) = a_lo + (a_hi - a_lo) * j / (n - 1);
      seeds.push_back(u);
    }
  return seeds;
}

namespace {

CurveProblem equilibrium_curve(const EquilibriumProblem& problem, Param param, double lo,
                               double hi, double state_bound) {
  const int n = problem.dimension();
  CurveProblem cp;
  cp.residual = [problem, param, n](const Vec& x) {
    return problem.with(param, x(n)).residual(x.head(n));
  };
  cp.jacobian = [problem, param, n](const Vec& x) {
    const EquilibriumProblem p = problem.with(param, x(n));
    Mat j(n, n + 1);
    j.leftCols(n) = p.jacobian(x.head(n));
    j.col(n) = p.param_derivative(x.head(n), param);
    return j;
  };
  cp.n_unstable = [problem, param, n](const Vec& x) {
    const EquilibriumProblem p = problem.with(param, x(n));
    StabilityOptions opts;
    opts.newton_tol = 1e-6;  // points come from the corrector; skip the strict check
    return stability(p, x.head(n), opts).n_unstable;
  };
  cp.fold_components = {n};
  cp.box.push_back({n, lo, hi});
  for (int i = 0; i < n; ++i) cp.box.push_back({i, -state_bound, state_bound});
  return cp;
}

std::vector<int> iota(int from, int to) {
  std::vector<int> v;
  for (int i = from; i < to; ++i) v.push_back(i);
  return v;
}

}  // namespace

Branch continue_branch_along(const EquilibriumProblem& problem, const Vec& start,
                             const Vec& direction, Param param, double lo, double hi,
                             const ContinuationConfig& cfg, double state_bound) {
  const int n = problem.dimension();
  if (start.size() != n + 1 && start.size() != n)
    throw std::invalid_argument("continue_branch: start has the wrong dimension");
  Vec x0(n + 1);
  x0.head(n) = start.head(n);
  x0(n) = start.size() == n + 1 ? start(n) : problem.get(param);
  const CurveProblem cp = equilibrium_curve(problem, param, lo, hi, state_bound);
  const CurveResult curve = continue_curve(cp, x0, direction, cfg);
  return to_branch(curve, {n}, iota(0, n), {to_string(param)}, problem.state_names());
}

Branch continue_branch(const EquilibriumProblem& problem, const Vec& start, Param param,
                       double lo, double hi, const ContinuationConfig& cfg, int direction,
                       double state_bound) {
  const int n = problem.dimension();
  Vec hint = Vec::Zero(n + 1);
  hint(n) = direction >= 0 ? 1.0 : -1.0;
  return continue_branch_along(problem, start, hint, param, lo, hi, cfg, state_bound);
}

Vec moore_spence_residual(const EquilibriumProblem& problem, const Vec& u, const Vec& phi,
                          double epsilon, double lambda, const Vec& l) {
  const EquilibriumProblem p = problem.with(Param::contrast, epsilon).with(Param::gain, lambda);
  const int m = static_cast<int>(u.size());
  Vec r(2 * m + 1);
  r.head(m) = p.residual(u);
  r.segment(m, m) = p.jacobian(u) * phi;
  r(2 * m) = l.dot(phi) - 1.0;
  return r;
}

FoldLocus fold_locus(const EquilibriumProblem& problem, const BranchPoint& fold_seed,
                     const ContinuationConfig& cfg, double eps_lo, double eps_hi,
                     double lambda_lo, double lambda_hi) {
  if (fold_seed.params.empty()) throw std::invalid_argument("fold_locus: seed has no parameter");
  const int m = problem.dimension();
  const double eps0 = problem.get(Param::contrast);
  const double lam0 = fold_seed.params[0];
  const Vec u0 = fold_seed.state;
  const Mat j0 = problem.with(Param::gain, lam0).jacobian(u0);
  Eigen::JacobiSVD<Mat> svd(j0, Eigen::ComputeFullV);
  const Vec l = svd.matrixV().col(m - 1);

  CurveProblem cp;
  cp.residual = [problem, l, m](const Vec& x) {
    return moore_spence_residual(problem, x.head(m), x.segment(m, m), x(2 * m), x(2 * m + 1), l);
  };
  cp.crossings = {{2 * m, 0.0}};
  cp.box = {{2 * m, eps_lo, eps_hi}, {2 * m + 1, lambda_lo, lambda_hi}};

  Vec x0(2 * m + 2);
  x0.head(m) = u0;
  x0.segment(m, m) = l;
  x0(2 * m) = eps0;
  x0(2 * m + 1) = lam0;

  ContinuationConfig c = cfg;
  c.jacobian = JacobianMode::finite_difference;
  Vec hint = Vec::Zero(2 * m + 2);
  hint(2 * m) = 1.0;
  const CurveResult fwd = continue_curve(cp, x0, hint, c);
  const CurveResult bwd = continue_curve(cp, x0, -hint, c);

  FoldLocus out;
  const auto names = problem.state_names();
  const Branch bf = to_branch(fwd, {2 * m, 2 * m + 1}, iota(0, m), {"epsilon", "lambda"}, names);
  const Branch bb = to_branch(bwd, {2 * m, 2 * m + 1}, iota(0, m), {"epsilon", "lambda"}, names);
  out.branch = join_branches(bb, bf);
  for (auto it = bwd.points.rbegin(); it != bwd.points.rend(); ++it) {
    if (it + 1 == bwd.points.rend()) break;
    out.null_vectors.push_back(it->x.segment(m, m));
  }
  for (const auto& p : fwd.points) out.null_vectors.push_back(p.x.segment(m, m));
  for (const CurveResult* r : {&fwd, &bwd})
    for (const auto* p : r->special(PointKind::crossing))
      if (p->component == 2 * m && !out.lambda_at_zero) out.lambda_at_zero = p->x(2 * m + 1);
  // with eps_lo = 0 the curve may stop on the box edge without changing sign
  if (!out.lambda_at_zero)
    for (const CurveResult* r : {&fwd, &bwd})
      if (!r->points.empty() && std::abs(r->points.back().x(2 * m)) <= 1e-10 && !out.lambda_at_zero)
        out.lambda_at_zero = r->points.back().x(2 * m + 1);
  return out;
}

HomotopyResult homotopy_start(const EquilibriumProblem& problem, double lambda_target,
                              const ContinuationConfig& cfg) {
  if (problem.spec().sigmoid != SigmoidKind::homotopy)
    throw std::invalid_argument("homotopy_start needs the homotopy sigmoid");
  if (problem.chart() != Chart::symmetric)
    throw std::invalid_argument("homotopy_start works in the symmetric chart");
  if (!(lambda_target > 0.0)) throw std::invalid_argument("lambda_target must be > 0");

  HomotopyResult out;
  const int n = problem.dimension();
  const double eps_target = problem.get(Param::contrast);
  const EquilibriumProblem p0 =
      problem.with(Param::mu, 0.0).with(Param::contrast, 0.0).with(Param::gain, 0.0);

  // (i)-(ii) trivial branch and its branch points
  out.trivial = continue_branch(p0, Vec::Zero(n), Param::gain, 0.0, lambda_target, cfg, +1);
  for (const auto* bp : out.trivial.with_kind(PointKind::branch_point)) {
    const double lam = bp->params[0];
    const Mat jac = p0.with(Param::gain, lam).jacobian(bp->state);
    Eigen::EigenSolver<Mat> es(jac);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best))) best = i;
    Vec v = es.eigenvectors().col(best).real();
    v.normalize();
    out.critical_gains.push_back(lam);
    out.critical_vectors.push_back(v);
  }

  // (iii) branch switching, then continuation in lambda up to the target
  std::vector<Vec> at_target{Vec::Zero(n)};
  const CurveProblem sw = [&] {
    CurveProblem cp;
    cp.residual = [p0, n](const Vec& x) { return p0.with(Param::gain, x(n)).residual(x.head(n)); };
    return cp;
  }();
  for (std::size_t k = 0; k < out.critical_gains.size(); ++k) {
    const double lam = out.critical_gains[k];
    const Vec& v = out.critical_vectors[k];
    bool any = false;
    for (double sign : {+1.0, -1.0}) {
      const double delta = 1e-3 * sign;
      Vec guess(n + 1);
      guess.head(n) = delta * v;
      guess(n) = lam;
      Vec normal = Vec::Zero(n + 1);
      normal.head(n) = v;
      const NewtonResult r = correct_on_hyperplane(sw, guess, normal, delta, cfg);
      if (!r.converged()) {
        out.notes.push_back("branch switch failed at lambda=" + std::to_string(lam));
        continue;
      }
      Vec dir = Vec::Zero(n + 1);
      dir.head(n) = sign * v;
      Branch b = continue_branch_along(p0, r.x, dir, Param::gain, 0.0, lambda_target, cfg);
      const auto& last = b.points.back();
      if (last.kind == PointKind::end && std::abs(last.params[0] - lambda_target) < 1e-8) {
        at_target.push_back(last.state);
        any = true;
      } else {
        out.notes.push_back("switched branch from lambda=" + std::to_string(lam) +
                            " did not reach the target gain (" + b.termination + ")");
      }
      out.switched.push_back(std::move(b));
    }
    if (!any) throw NumericalError("branch switching failed at lambda=" + std::to_string(lam));
  }

  // (iv) mu: 0 -> 1 at the target gain
  const EquilibriumProblem pl = p0.with(Param::gain, lambda_target);
  std::vector<Vec> at_mu1;
  for (const Vec& u : at_target) {
    Branch b = continue_branch(pl, u, Param::mu, 0.0, 1.0, cfg, +1);
    const auto& last = b.points.back();
    if (last.kind == PointKind::end && std::abs(last.params[0] - 1.0) < 1e-8)
      at_mu1.push_back(last.state);
    else
      out.notes.push_back("mu continuation did not reach mu=1 (" + b.termination + ")");
    out.mu_branches.push_back(std::move(b));
  }

  // (v) optional contrast stage, then polish on the target problem
  const EquilibriumProblem pt = problem.with(Param::gain, lambda_target).with(Param::mu, 1.0);
  std::vector<Vec> finals;
  if (eps_target != 0.0) {
    const EquilibriumProblem pe = pt.with(Param::contrast, 0.0);
    for (const Vec& u : at_mu1) {
      Branch b = continue_branch(pe, u, Param::contrast, std::min(0.0, eps_target),
                                 std::max(0.0, eps_target), cfg, eps_target > 0 ? +1 : -1);
      const auto& last = b.points.back();
      if (last.kind == PointKind::end && std::abs(last.params[0] - eps_target) < 1e-10)
        finals.push_back(last.state);
      else
        out.notes.push_back("contrast continuation did not reach the target (" + b.termination + ")");
      out.contrast_branches.push_back(std::move(b));
    }
  } else {
    finals = at_mu1;
  }
  NewtonConfig ncfg;
  ncfg.tol = cfg.newton_tol;
  for (const Vec& u : finals) {
    const NewtonResult r = solve_equilibrium(pt, u, ncfg);
    if (!r.converged()) continue;
    const bool dup = std::any_of(out.equilibria.begin(), out.equilibria.end(),
                                 [&](const Vec& f) { return (f - r.x).norm() < 1e-7; });
    if (!dup) out.equilibria.push_back(r.x);
  }
  return out;
}

}  // namespace ringmodel
