#include <algorithm>
#include <cmath>

#include "raceopt/common/error.hpp"
#include "raceopt/nlp/solver.hpp"

namespace raceopt::nlp {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::numerical_error:
      return "numerical_error";
  }
  return "unknown";
}

double KktBreakdown::max() const { return std::max({stationarity, primal, complementarity}); }

namespace {

double side_complementarity(double mult, double gap) {
  if (mult < 0.0) return -mult;
  if (!std::isfinite(gap)) return mult;
  return mult * std::abs(gap);
}

}  // namespace

double constraint_violation(const NlpProblem& p, const Vector& z) {
  const Vector& lb = p.variable_lower();
  const Vector& ub = p.variable_upper();
  double v = 0.0;
  for (int i = 0; i < p.num_variables(); ++i) v = std::max({v, lb[i] - z[i], z[i] - ub[i]});
  if (p.num_constraints() > 0) {
    Vector g;
    p.constraints(z, g);
    const Vector& gl = p.constraint_lower();
    const Vector& gu = p.constraint_upper();
    for (int i = 0; i < p.num_constraints(); ++i) {
      if (!std::isfinite(g[i])) return std::numeric_limits<double>::infinity();
      v = std::max({v, gl[i] - g[i], g[i] - gu[i]});
    }
  }
  return v;
}

KktBreakdown kkt_breakdown(const NlpProblem& p, const Vector& z, const Vector& lambda, const Vector& z_lower,
                           const Vector& z_upper) {
  const int n = p.num_variables();
  const int m = p.num_constraints();
  if (z.size() != n || lambda.size() != m || z_lower.size() != n || z_upper.size() != n)
    throw Error(ErrorCode::invalid_argument, "kkt_residual: dimension mismatch");
  Vector grad;
  p.objective_gradient(z, grad);
  Vector g = Vector::Zero(m);
  Vector r = grad - z_lower + z_upper;
  if (m > 0) {
    p.constraints(z, g);
    SparseMatrix jac = p.jacobian_structure();
    p.jacobian(z, jac);
    r += jac.transpose() * lambda;
  }
  const double mult_sum = lambda.lpNorm<1>() + z_lower.lpNorm<1>() + z_upper.lpNorm<1>();
  const double count = std::max(1, m + 2 * n);
  const double sd = std::max(1.0, mult_sum / count / 100.0);

  KktBreakdown k;
  k.stationarity = (n > 0 ? r.lpNorm<Eigen::Infinity>() : 0.0) / sd;
  k.primal = constraint_violation(p, z);
  const Vector& lb = p.variable_lower();
  const Vector& ub = p.variable_upper();
  double c = 0.0;
  for (int i = 0; i < n; ++i) {
    c = std::max(c, side_complementarity(z_lower[i], z[i] - lb[i]));
    c = std::max(c, side_complementarity(z_upper[i], ub[i] - z[i]));
  }
  const Vector& gl = p.constraint_lower();
  const Vector& gu = p.constraint_upper();
  for (int i = 0; i < m; ++i) {
    if (lambda[i] > 0.0) c = std::max(c, side_complementarity(lambda[i], gu[i] - g[i]));
    if (lambda[i] < 0.0) c = std::max(c, side_complementarity(-lambda[i], g[i] - gl[i]));
  }
  k.complementarity = c / sd;
  if (!std::isfinite(k.stationarity) || !std::isfinite(k.complementarity) || !std::isfinite(k.primal))
    k.stationarity = std::numeric_limits<double>::infinity();
  return k;
}

double kkt_residual(const NlpProblem& p, const Vector& z, const Vector& lambda, const Vector& z_lower,
                    const Vector& z_upper) {
  return kkt_breakdown(p, z, lambda, z_lower, z_upper).max();
}

Vector default_start(const NlpProblem& p, const SolverOptions& opts) {
  const int n = p.num_variables();
  const Vector& lb = p.variable_lower();
  const Vector& ub = p.variable_upper();
  Vector z(n);
  if (opts.warmstart) {
    if (opts.warmstart->size() != n) throw Error(ErrorCode::invalid_argument, "warmstart has wrong dimension");
    z = *opts.warmstart;
  } else {
    for (int i = 0; i < n; ++i) {
      const bool fl = std::isfinite(lb[i]);
      const bool fu = std::isfinite(ub[i]);
      z[i] = (fl && fu) ? 0.5 * (lb[i] + ub[i]) : 0.0;
    }
  }
  for (int i = 0; i < n; ++i) z[i] = std::clamp(z[i], lb[i], ub[i]);
  return z;
}

NlpSolution backend_seam(const NlpProblem& p, const SolverOptions& opts, const ExternalSolver& external) {
  if (!external) throw Error(ErrorCode::invalid_argument, "backend_seam: no external solver supplied");
  NlpSolution sol = external(p, opts);
  const int n = p.num_variables();
  const int m = p.num_constraints();
  if (sol.z.size() != n) {
    sol.status = SolveStatus::numerical_error;
    sol.message = "external solver returned a solution of wrong dimension";
    return sol;
  }
  if (sol.lambda.size() != m) sol.lambda = Vector::Zero(m);
  if (sol.z_lower.size() != n) sol.z_lower = Vector::Zero(n);
  if (sol.z_upper.size() != n) sol.z_upper = Vector::Zero(n);
  sol.objective = p.objective(sol.z);
  sol.kkt_residual = kkt_residual(p, sol.z, sol.lambda, sol.z_lower, sol.z_upper);
  sol.constraint_violation = constraint_violation(p, sol.z);
  if (sol.status == SolveStatus::optimal && !(sol.kkt_residual <= opts.tol && sol.constraint_violation <= opts.tol)) {
    sol.status = SolveStatus::numerical_error;
    sol.message = "external solver claimed optimal but the KKT re-check failed";
  }
  return sol;
}

}  // namespace raceopt::nlp
