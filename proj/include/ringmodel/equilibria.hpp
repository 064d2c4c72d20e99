#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ringmodel/continuation.hpp"
#include "ringmodel/galerkin.hpp"
#include "ringmodel/newton.hpp"

namespace ringmodel {

/// Coordinate chart for equilibrium work: the full real layout (2N+1
/// unknowns) or the reflection-invariant subspace Im z_k = 0 (N+1 unknowns).
enum class Chart { full, symmetric };

enum class Param { gain, contrast, threshold, mu };

std::string to_string(Chart chart);
std::string to_string(Param param);
Param param_from_string(const std::string& name);

/// Canonical LGN drive parameters.
struct DriveSpec {
  double beta = 0.1;
  double x0 = 0.0;
  double epsilon = 0.0;
  double second_mode_ratio = 0.0;

  DriveFrame frame(const ModelSpec& spec) const;
};

/// Equilibrium equations of the Galerkin system for a fixed drive, in a chart.
class EquilibriumProblem {
 public:
  EquilibriumProblem(ModelSpec spec, DriveSpec drive, Chart chart = Chart::full);

  const GalerkinModel& model() const { return model_; }
  const ModelSpec& spec() const { return model_.spec(); }
  const DriveSpec& drive() const { return drive_; }
  const DriveFrame& frame() const { return frame_; }
  Chart chart() const { return chart_; }
  int dimension() const;

  double get(Param p) const;
  EquilibriumProblem with(Param p, double value) const;

  Vec residual(const Vec& u) const;
  Mat jacobian(const Vec& u) const;  // analytic, in the chart
  Vec param_derivative(const Vec& u, Param p, double h = 1e-6) const;

  Vec encode(const CortexState& s) const;
  CortexState decode(const Vec& u) const;
  std::vector<std::string> state_names() const;

 private:
  GalerkinModel model_;
  DriveSpec drive_;
  DriveFrame frame_;
  Chart chart_;
};

struct StabilityOptions {
  double margin = 1e-8;
  double newton_tol = 1e-10;
  bool finite_difference = true;
  double fd_step = 1e-6;
};

struct StabilityReport {
  int n_unstable = 0;
  double leading_real_part = 0.0;
  Eigen::VectorXcd eigenvalues;

  bool stable() const { return n_unstable == 0; }
};

StabilityReport stability_from_jacobian(const Mat& jac, double margin = 1e-8);

/// Linear stability of an equilibrium in the problem's chart. Throws
/// std::invalid_argument if the residual exceeds 10 newton_tol.
StabilityReport stability(const EquilibriumProblem& problem, const Vec& u,
                          const StabilityOptions& opts = {});

/// Convenience overload in the full real layout.
StabilityReport stability(const GalerkinModel& model, const CortexState& state,
                          const DriveFrame& drive, const StabilityOptions& opts = {});

NewtonResult solve_equilibrium(const EquilibriumProblem& problem, const Vec& guess,
                               const NewtonConfig& cfg = {});

/// Newton from every seed; returns the distinct converged solutions
/// (distance > `dedupe_radius`), sorted by first component then second.
std::vector<Vec> enumerate_equilibria(const EquilibriumProblem& problem,
                                      const std::vector<Vec>& seeds, const NewtonConfig& cfg = {},
                                      double dedupe_radius = 1e-6);

/// n x n grid over (v0, Re z1) with the other coordinates zero, in the
/// problem's chart.
std::vector<Vec> seed_grid(const EquilibriumProblem& problem, double v0_lo, double v0_hi,
                           double a_lo, double a_hi, int n);

/// Continues equilibria of `problem` in one parameter over [lo, hi], starting
/// at `start` (in the problem's chart), heading towards increasing parameter
/// if direction > 0. Stability (chart eigenvalues) is recorded per point.
Branch continue_branch(const EquilibriumProblem& problem, const Vec& start, Param param,
                       double lo, double hi, const ContinuationConfig& cfg, int direction = +1,
                       double state_bound = 50.0);

/// Same, with the start given as a direction in (state, param) space.
Branch continue_branch_along(const EquilibriumProblem& problem, const Vec& start,
                             const Vec& direction, Param param, double lo, double hi,
                             const ContinuationConfig& cfg, double state_bound = 50.0);

/// Two-parameter continuation of a fold in (epsilon, lambda) via the
/// Moore-Spence system [F; F_u phi; l.phi - 1]. The seed is a refined fold
/// of a gain branch at the problem's contrast. Both directions are followed;
/// the returned branch is ordered from the `eps_lo` end to the `eps_hi` end.
struct FoldLocus {
  Branch branch;                         // params (epsilon, lambda), state u
  std::optional<double> lambda_at_zero;  // refined crossing of epsilon = 0
  std::vector<Vec> null_vectors;         // phi at each branch point
};

FoldLocus fold_locus(const EquilibriumProblem& problem, const BranchPoint& fold_seed,
                     const ContinuationConfig& cfg, double eps_lo, double eps_hi,
                     double lambda_lo, double lambda_hi);

/// Residual of the Moore-Spence system at (u, phi, epsilon, lambda) with
/// normalization vector l; used for re-verification.
Vec moore_spence_residual(const EquilibriumProblem& problem, const Vec& u, const Vec& phi,
                          double epsilon, double lambda, const Vec& l);

/// mu-homotopy start-up. The problem must use the homotopy sigmoid and the
/// symmetric chart; its drive contrast is reached in the final stage.
struct HomotopyResult {
  std::vector<double> critical_gains;   // branch points of the trivial branch at mu = 0
  std::vector<Vec> critical_vectors;
  Branch trivial;                       // mu = 0 trivial branch in lambda
  std::vector<Branch> switched;         // bifurcated branches in lambda at mu = 0
  std::vector<Branch> mu_branches;      // continuation in mu at lambda_target
  std::vector<Branch> contrast_branches;  // continuation in epsilon at mu = 1
  std::vector<Vec> equilibria;          // mu = 1 slice at the target contrast
  std::vector<std::string> notes;       // branch-switch failures and discards
};

HomotopyResult homotopy_start(const EquilibriumProblem& problem, double lambda_target,
                              const ContinuationConfig& cfg);

}  // namespace ringmodel
