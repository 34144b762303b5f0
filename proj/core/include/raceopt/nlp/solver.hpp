#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "raceopt/nlp/problem.hpp"

namespace raceopt::nlp {

enum class SolveStatus { optimal, max_iter, infeasible, numerical_error };

std::string to_string(SolveStatus status);

enum class Backend { builtin, external };

struct SolverOptions {
  double tol = 1e-6;
  // Augmented Lagrangian.
  int max_outer_iterations = 60;
  int max_inner_iterations = 5000;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e8;
  int lbfgs_memory = 10;
  // Interior point.
  int max_iterations = 3000;
  double mu_init = 0.1;
  double bound_push = 1e-2;

  double max_wall_time = std::numeric_limits<double>::infinity();  // seconds
  std::optional<Vector> warmstart;
  std::optional<Vector> warmstart_lambda;
  std::optional<Vector> warmstart_z_lower;  // bound multipliers, interior point only
  std::optional<Vector> warmstart_z_upper;
  /// Receives one line per iteration ("iter obj viol kkt ...") when set.
  std::function<void(const std::string&)> log;
};

struct NlpSolution {
  Vector z;
  Vector lambda;   // constraint multipliers, positive when the upper bound is active
  Vector z_lower;  // bound multipliers, >= 0
  Vector z_upper;
  SolveStatus status = SolveStatus::numerical_error;
  double objective = 0.0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double constraint_violation = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double wall_time = 0.0;
  std::string message;
};

struct KktBreakdown {
  double stationarity = 0.0;
  double primal = 0.0;  // max bound or constraint violation
  double complementarity = 0.0;
  double max() const;
};

/// Optimality residual of (z, lambda, z_lower, z_upper) for
///   L = f + lambda'g - z_lower'(z - lb) + z_upper'(z - ub).
/// Stationarity and complementarity are divided by
/// max(1, mean|multipliers| / 100) so large but correct multipliers do not
/// dominate; the primal part is unscaled. Multipliers with the wrong sign
/// count as complementarity violations.
KktBreakdown kkt_breakdown(const NlpProblem& p, const Vector& z, const Vector& lambda, const Vector& z_lower,
                           const Vector& z_upper);
double kkt_residual(const NlpProblem& p, const Vector& z, const Vector& lambda, const Vector& z_lower,
                    const Vector& z_upper);

/// Max violation of variable bounds and constraint bounds at z.
double constraint_violation(const NlpProblem& p, const Vector& z);

/// Start point used by the solvers: the warmstart if given, otherwise the
/// bound midpoint (zero for free directions), always clipped to the bounds.
Vector default_start(const NlpProblem& p, const SolverOptions& opts);

/// Built-in solver: augmented Lagrangian outer loop with a projected L-BFGS
/// inner solver. Ignores the Hessian hook.
NlpSolution solve(const NlpProblem& p, const SolverOptions& opts = {});

/// Primal-dual interior point method with a filter line search and exact
/// Hessians. Requires p.has_hessian().
NlpSolution solve_interior_point(const NlpProblem& p, const SolverOptions& opts = {});

using ExternalSolver = std::function<NlpSolution(const NlpProblem&, const SolverOptions&)>;

/// Runs an external solver under the same contract as solve(): the result is
/// re-evaluated, and a claimed optimum that fails the re-check is downgraded
/// to numerical_error.
NlpSolution backend_seam(const NlpProblem& p, const SolverOptions& opts, const ExternalSolver& external);

}  // namespace raceopt::nlp
