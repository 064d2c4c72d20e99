#include "ringmodel/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/QR>

namespace ringmodel {

void ContinuationConfig::validate() const {
  if (!(ds_min > 0.0 && ds_min <= ds && ds <= ds_max))
    throw std::invalid_argument("continuation steps must satisfy 0 < ds_min <= ds <= ds_max");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be > 0");
  if (newton_max_iters < 1) throw std::invalid_argument("newton_max_iters must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be > 0");
}

std::string to_string(PointKind kind) {
  switch (kind) {
    case PointKind::regular: return "regular";
    case PointKind::start: return "start";
    case PointKind::fold: return "fold";
    case PointKind::branch_point: return "branch_point";
    case PointKind::crossing: return "crossing";
    case PointKind::end: return "end";
  }
  return "regular";
}

std::vector<const CurvePoint*> CurveResult::special(PointKind kind) const {
  std::vector<const CurvePoint*> out;
  for (const auto& p : points)
    if (p.kind == kind) out.push_back(&p);
  return out;
}

Vec curve_tangent(const Mat& jac, const Vec& hint) {
  const Eigen::Index n1 = jac.cols();
  Eigen::HouseholderQR<Mat> qr(jac.transpose());
  const Mat q = qr.householderQ();
  Vec t = q.col(n1 - 1);
  t.normalize();
  if (hint.size() == t.size() && t.dot(hint) < 0.0) t = -t;
  return t;
}

namespace {

Mat curve_jacobian(const CurveProblem& p, const Vec& x, const ContinuationConfig& cfg) {
  if (cfg.jacobian == JacobianMode::analytic && p.jacobian) return p.jacobian(x);
  return fd_jacobian(p.residual, x, cfg.fd_step);
}

struct Refiner {
  const CurveProblem& problem;
  const ContinuationConfig& cfg;
  Vec a, b;  // bracket endpoints on the curve

  // Point on the curve whose projection onto the chord sits at fraction s.
  std::optional<Vec> at(double s) const {
    const Vec chord = b - a;
    const double len = chord.norm();
    if (len == 0.0) return a;
    const Vec n = chord / len;
    const Vec guess = a + s * chord;
    const NewtonResult r = correct_on_hyperplane(problem, guess, n, n.dot(guess), cfg);
    if (!r.converged()) return std::nullopt;
    return r.x;
  }

  // Bisection on s for a sign change of g. Returns the refined point and s.
  template <class G>
  std::optional<std::pair<Vec, double>> bisect(const G& g, double ga, double tol) const {
    double lo = 0.0, hi = 1.0;
    const double len = (b - a).norm();
    Vec best = a;
    double best_s = 0.0;
    for (int it = 0; it < 80 && (hi - lo) * len > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto p = at(mid);
      if (!p) return std::nullopt;
      const double gm = g(*p);
      best = *p;
      best_s = mid;
      if (gm == 0.0) break;
      if ((gm > 0.0) == (ga > 0.0)) lo = mid; else hi = mid;
    }
    return std::make_pair(best, best_s);
  }

  // Same on [lo, hi] with g(lo) > 0 and g(hi) < 0; returns the refined point
  // on the negative side and its s.
  template <class G>
  std::optional<std::pair<Vec, double>> bisect_right(const G& g, double lo, double hi, double tol) const {
    const double len = (b - a).norm();
    Vec right = b;
    if (hi < 1.0) {
      const auto p = at(hi);
      if (!p) return std::nullopt;
      right = *p;
    }
    for (int it = 0; it < 80 && (hi - lo) * len > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto p = at(mid);
      if (!p) return std::nullopt;
      if (g(*p) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        right = *p;
      }
    }
    return std::make_pair(right, hi);
  }
};

struct Event {
  double s;
  CurvePoint point;
};

}  // namespace

NewtonResult correct_on_hyperplane(const CurveProblem& problem, const Vec& guess, const Vec& normal,
                                   double c, const ContinuationConfig& cfg) {
  const auto g = [&](const Vec& x) {
    const Vec h = problem.residual(x);
    Vec out(h.size() + 1);
    out.head(h.size()) = h;
    out(h.size()) = normal.dot(x) - c;
    return out;
  };
  const auto jg = [&](const Vec& x) {
    const Mat j = curve_jacobian(problem, x, cfg);
    Mat out(j.rows() + 1, j.cols());
    out.topRows(j.rows()) = j;
    out.row(j.rows()) = normal.transpose();
    return out;
  };
  NewtonConfig ncfg;
  ncfg.tol = cfg.newton_tol;
  ncfg.max_iters = cfg.newton_max_iters;
  ncfg.fd_step = cfg.fd_step;
  return newton_solve(g, guess, ncfg, jg);
}

CurveResult continue_curve(const CurveProblem& problem, const Vec& x0, const Vec& direction_hint,
                           const ContinuationConfig& cfg) {
  cfg.validate();
  CurveResult out;
  auto stab = [&](const Vec& x) { return problem.n_unstable ? problem.n_unstable(x) : -1; };
  auto tangent_at = [&](const Vec& x, const Vec& hint) {
    return curve_tangent(curve_jacobian(problem, x, cfg), hint);
  };

  const Vec t_guess = tangent_at(x0, direction_hint);
  const NewtonResult r0 = correct_on_hyperplane(problem, x0, t_guess, t_guess.dot(x0), cfg);
  if (!r0.converged()) {
    out.termination = "start point did not converge (" + to_string(r0.status) + ")";
    return out;
  }
  Vec x = r0.x;
  Vec t = tangent_at(x, t_guess);
  int nu = stab(x);
  out.points.push_back({x, t, nu, PointKind::start, -1});

  auto outside = [&](const Vec& p) {
    for (const auto& b : problem.box)
      if (p(b.index) < b.lo || p(b.index) > b.hi) return true;
    return false;
  };
  if (outside(x)) {
    out.termination = "start point outside the box";
    return out;
  }

  double ds = cfg.ds;
  Vec dir = t;
  const double cos_turn = std::cos(cfg.max_turn);
  out.termination = "max_steps reached";
  for (int step = 0; step < cfg.max_steps; ++step) {
    const Vec pred = x + ds * dir;
    const NewtonResult r = correct_on_hyperplane(problem, pred, dir, dir.dot(pred), cfg);
    bool ok = r.converged();
    Vec xn, tn;
    if (ok) {
      xn = r.x;
      ok = (xn - x).norm() <= 2.0 * ds;
    }
    if (ok) {
      tn = tangent_at(xn, dir);
      ok = tn.dot(t) >= cos_turn;
    }
    if (ok && problem.admissible) ok = problem.admissible(xn);
    if (!ok) {
      ds *= 0.5;
      if (ds < cfg.ds_min) {
        out.termination = "step failure at ds_min";
        break;
      }
      continue;
    }

    // Box exit: land on the face that is crossed first.
    bool leaving = false;
    if (outside(xn)) {
      double best_s = 2.0;
      int best = -1;
      for (std::size_t i = 0; i < problem.box.size(); ++i) {
        const auto& b = problem.box[i];
        const double lim = xn(b.index) < b.lo ? b.lo : (xn(b.index) > b.hi ? b.hi : NAN);
        if (std::isnan(lim)) continue;
        const double s = (lim - x(b.index)) / (xn(b.index) - x(b.index));
        if (s < best_s) {
          best_s = s;
          best = static_cast<int>(i);
        }
      }
      const auto& b = problem.box[best];
      const double lim = xn(b.index) < b.lo ? b.lo : b.hi;
      Refiner ref{problem, cfg, x, xn};
      auto g = [&](const Vec& p) { return p(b.index) - lim; };
      const auto land = ref.bisect(g, g(x), 1e-13);
      if (!land) {
        out.termination = "failed to land on the box boundary";
        break;
      }
      xn = land->first;
      const Vec e = Vec::Unit(xn.size(), b.index);
      const NewtonResult snap = correct_on_hyperplane(problem, xn, e, lim, cfg);
      if (snap.converged()) xn = snap.x;
      tn = tangent_at(xn, dir);
      leaving = true;
    }

    const int nun = stab(xn);
    std::vector<Event> events;
    Refiner ref{problem, cfg, x, xn};
    bool fold_here = false;
    for (int c : problem.fold_components) {
      if ((t(c) > 0.0) == (tn(c) > 0.0) || t(c) == 0.0) continue;
      const Vec chord = xn - x;
      auto g = [&](const Vec& p) { return curve_tangent(curve_jacobian(problem, p, cfg), chord)(c); };
      const auto hit = ref.bisect(g, t(c), cfg.special_tol * 1e-2);
      if (!hit) continue;
      const Vec tf = curve_tangent(curve_jacobian(problem, hit->first, cfg), chord);
      events.push_back({hit->second, {hit->first, tf, stab(hit->first), PointKind::fold, c}});
      fold_here = true;
    }
    for (const auto& [c, value] : problem.crossings) {
      const double ga = x(c) - value, gb = xn(c) - value;
      if (ga == 0.0 || (ga > 0.0) == (gb > 0.0)) continue;
      auto g = [&](const Vec& p) { return p(c) - value; };
      const auto hit = ref.bisect(g, ga, 1e-13);
      if (!hit) continue;
      events.push_back({hit->second,
                        {hit->first, tangent_at(hit->first, dir), stab(hit->first),
                         PointKind::crossing, c}});
    }
    if (problem.n_unstable && nun != nu && !fold_here) {
      // One step may jump over several stability changes; locate each in turn.
      int cur = nu;
      double from = 0.0;
      for (int guard = 0; cur != nun && guard < static_cast<int>(x.size()) + 2; ++guard) {
        auto g = [&](const Vec& p) { return stab(p) == cur ? 1.0 : -1.0; };
        const auto hit = ref.bisect_right(g, from, 1.0, cfg.special_tol);
        if (!hit) break;
        const int k = stab(hit->first);
        events.push_back({hit->second,
                          {hit->first, tangent_at(hit->first, dir), k, PointKind::branch_point, -1}});
        cur = k;
        from = hit->second;
      }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.s < b.s; });
    for (auto& e : events) out.points.push_back(std::move(e.point));

    out.points.push_back({xn, tn, nun, leaving ? PointKind::end : PointKind::regular, -1});
    if (leaving) {
      out.termination = "left the box";
      break;
    }
    dir = (xn - x).normalized();
    if (dir.dot(tn) < 0.0) dir = tn;
    x = xn;
    t = tn;
    nu = nun;
    if (r.iterations <= 3) ds = std::min(ds * cfg.growth, cfg.ds_max);
  }
  return out;
}

std::vector<const BranchPoint*> Branch::with_kind(PointKind kind) const {
  std::vector<const BranchPoint*> out;
  for (const auto& p : points)
    if (p.kind == kind) out.push_back(&p);
  return out;
}

Branch to_branch(const CurveResult& curve, const std::vector<int>& param_index,
                 const std::vector<int>& state_index, std::vector<std::string> param_names,
                 std::vector<std::string> state_names) {
  Branch b;
  b.param_names = std::move(param_names);
  b.state_names = std::move(state_names);
  b.termination = curve.termination;
  for (const auto& cp : curve.points) {
    BranchPoint bp;
    for (int i : param_index) bp.params.push_back(cp.x(i));
    bp.state.resize(static_cast<Eigen::Index>(state_index.size()));
    for (std::size_t k = 0; k < state_index.size(); ++k) bp.state(k) = cp.x(state_index[k]);
    bp.n_unstable = cp.n_unstable;
    bp.stable = cp.n_unstable == 0;
    bp.kind = cp.kind;
    if (cp.kind != PointKind::regular) b.special_points.push_back({b.points.size(), cp.kind, bp.params});
    b.points.push_back(std::move(bp));
  }
  return b;
}

Branch join_branches(const Branch& backward, const Branch& forward) {
  Branch b;
  b.param_names = forward.param_names;
  b.state_names = forward.state_names;
  b.termination = "backward: " + backward.termination + "; forward: " + forward.termination;
  for (auto it = backward.points.rbegin(); it != backward.points.rend(); ++it) {
    if (it + 1 == backward.points.rend()) break;  // shared start point
    b.points.push_back(*it);
  }
  for (const auto& p : forward.points) b.points.push_back(p);
  for (std::size_t i = 0; i < b.points.size(); ++i)
    if (b.points[i].kind != PointKind::regular)
      b.special_points.push_back({i, b.points[i].kind, b.points[i].params});
  return b;
}

}  // namespace ringmodel
