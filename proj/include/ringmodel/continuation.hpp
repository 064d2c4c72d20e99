#pragma once

// Pseudo-arclength continuation of a solution curve H(X) = 0 with
// H : R^{n+1} -> R^n. X packs the state and the free parameter(s); the
// engine is agnostic to which components are which.

#include <functional>
#include <string>
#include <vector>

#include "ringmodel/newton.hpp"

namespace ringmodel {

enum class JacobianMode { finite_difference, analytic };

struct ContinuationConfig {
  double ds = 0.05;
  double ds_min = 1e-6;
  double ds_max = 0.5;
  double newton_tol = 1e-10;
  int newton_max_iters = 12;
  int max_steps = 5000;
  JacobianMode jacobian = JacobianMode::finite_difference;
  double fd_step = 1e-6;
  double special_tol = 1e-8;  // arclength resolution of fold / crossing refinement
  double max_turn = 0.5;      // max angle (rad) between consecutive tangents
  double growth = 1.4;

  void validate() const;
};

struct BoxBound {
  int index;
  double lo;
  double hi;
};

struct CurveProblem {
  VectorFn residual;                         // H(X)
  MatrixFn jacobian;                         // dH/dX, n x (n+1); optional
  std::function<int(const Vec&)> n_unstable; // optional stability monitor
  std::vector<int> fold_components;          // tangent components watched for sign changes
  std::vector<std::pair<int, double>> crossings;  // marks X_i == value
  std::vector<BoxBound> box;                 // leaving the box ends the run (landing on the face)
  std::function<bool(const Vec&)> admissible;  // optional; inadmissible points are rejected
};

enum class PointKind { regular, start, fold, branch_point, crossing, end };

std::string to_string(PointKind kind);

struct CurvePoint {
  Vec x;
  Vec tangent;
  int n_unstable = -1;
  PointKind kind = PointKind::regular;
  int component = -1;  // fold/crossing: which component triggered it
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::string termination;

  std::vector<const CurvePoint*> special(PointKind kind) const;
};

/// Unit null vector of the n x (n+1) Jacobian, oriented so that
/// dot(tangent, hint) >= 0.
Vec curve_tangent(const Mat& jac, const Vec& hint);

/// Continues from x0 (which must satisfy H to newton_tol after correction)
/// in the direction selected by `direction_hint`.
CurveResult continue_curve(const CurveProblem& problem, const Vec& x0, const Vec& direction_hint,
                           const ContinuationConfig& cfg);

/// Newton on [H(X); n.X - c] from `guess`.
NewtonResult correct_on_hyperplane(const CurveProblem& problem, const Vec& guess, const Vec& normal,
                                   double c, const ContinuationConfig& cfg);

struct BranchPoint {
  std::vector<double> params;
  Vec state;
  int n_unstable = -1;
  bool stable = false;
  PointKind kind = PointKind::regular;

  bool is_fold() const { return kind == PointKind::fold; }
};

struct SpecialPoint {
  std::size_t index;
  PointKind kind;
  std::vector<double> params;
};

/// Continuation output with named parameters and state components.
struct Branch {
  std::vector<std::string> param_names;
  std::vector<std::string> state_names;
  std::vector<BranchPoint> points;
  std::vector<SpecialPoint> special_points;
  std::string termination;

  std::vector<const BranchPoint*> with_kind(PointKind kind) const;
  std::vector<const BranchPoint*> folds() const { return with_kind(PointKind::fold); }
};

/// Splits every curve point into (params, state) by component index.
Branch to_branch(const CurveResult& curve, const std::vector<int>& param_index,
                 const std::vector<int>& state_index, std::vector<std::string> param_names,
                 std::vector<std::string> state_names);

/// Concatenates `backward` (reversed, without its start) and `forward`.
Branch join_branches(const Branch& backward, const Branch& forward);

}  // namespace ringmodel
