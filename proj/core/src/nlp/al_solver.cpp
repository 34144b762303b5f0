// Augmented Lagrangian (PHR form) with a projected L-BFGS inner solver.
// Inequality rows g_lb <= g <= g_ub use slacks s in [g_lb, g_ub]; the slacks
// are minimized out in closed form, s = clamp(g + lambda/rho), so the inner
// problem is bound-constrained in z only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>

#include "raceopt/nlp/solver.hpp"

namespace raceopt::nlp {
namespace {

using Clock = std::chrono::steady_clock;

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const NlpProblem& p) : p_(p), jac_(p.jacobian_structure()) {}

  double rho = 10.0;
  Vector lambda;

  // Phi(z) and its gradient. Returns +inf when a callback is not finite.
  double value(const Vector& z, Vector& grad) {
    ++evaluations;
    const double f = p_.objective(z);
    p_.objective_gradient(z, grad);
    double phi = f;
    if (p_.num_constraints() > 0) {
      p_.constraints(z, g_);
      p_.jacobian(z, jac_);
      const Vector& gl = p_.constraint_lower();
      const Vector& gu = p_.constraint_upper();
      Vector w(g_.size());
      for (int i = 0; i < g_.size(); ++i) {
        const double t = g_[i] + lambda[i] / rho;
        const double d = t - std::clamp(t, gl[i], gu[i]);
        phi += 0.5 * rho * d * d - 0.5 * lambda[i] * lambda[i] / rho;
        w[i] = rho * d;
      }
      grad += jac_.transpose() * w;
    }
    if (!std::isfinite(phi) || !grad.allFinite()) return std::numeric_limits<double>::infinity();
    return phi;
  }

  // Constraint values at the last evaluated point.
  const Vector& g() const { return g_; }
  const SparseMatrix& jacobian() const { return jac_; }

  long evaluations = 0;

 private:
  const NlpProblem& p_;
  Vector g_;
  SparseMatrix jac_;
};

struct LbfgsMemory {
  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> pairs;
  int capacity = 10;

  void push(Vector s, Vector y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
    if (static_cast<int>(pairs.size()) > capacity) pairs.pop_front();
  }

  // Returns approximately H^-1 q with the inverse built from the stored pairs.
  Vector apply(Vector q, const std::vector<char>& free) const {
    auto mask = [&](Vector& v) {
      for (int i = 0; i < v.size(); ++i)
        if (!free[i]) v[i] = 0.0;
    };
    mask(q);
    const int k = static_cast<int>(pairs.size());
    std::vector<double> alpha(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
      Vector s = pairs[i].s;
      mask(s);
      alpha[i] = pairs[i].rho * s.dot(q);
      Vector y = pairs[i].y;
      mask(y);
      q -= alpha[i] * y;
    }
    double gamma = 1.0;
    if (k > 0) gamma = pairs.back().s.dot(pairs.back().y) / pairs.back().y.squaredNorm();
    q *= gamma;
    for (int i = 0; i < k; ++i) {
      Vector y = pairs[i].y;
      mask(y);
      const double beta = pairs[i].rho * y.dot(q);
      Vector s = pairs[i].s;
      mask(s);
      q += (alpha[i] - beta) * s;
    }
    mask(q);
    return q;
  }
};

Vector project(const Vector& z, const Vector& lb, const Vector& ub) { return z.cwiseMax(lb).cwiseMin(ub); }

double projected_gradient_norm(const Vector& z, const Vector& grad, const Vector& lb, const Vector& ub) {
  return (z - project(z - grad, lb, ub)).lpNorm<Eigen::Infinity>();
}

struct InnerResult {
  int iterations = 0;
  bool converged = false;
  bool numerical_error = false;
};

// Minimizes phi over the box by projected L-BFGS with a strong-Wolfe line
// search along the projected path.
InnerResult minimize_box(AugmentedLagrangian& phi, Vector& z, const Vector& lb, const Vector& ub, double eps,
                         int max_iter, int memory, Clock::time_point deadline) {
  InnerResult res;
  const int n = static_cast<int>(z.size());
  z = project(z, lb, ub);
  Vector grad;
  double f = phi.value(z, grad);
  if (!std::isfinite(f)) {
    res.numerical_error = true;
    return res;
  }
  LbfgsMemory mem;
  mem.capacity = memory;
  std::vector<char> free(static_cast<std::size_t>(n));
  int failures = 0;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    if (projected_gradient_norm(z, grad, lb, ub) <= eps) {
      res.converged = true;
      return res;
    }
    if (Clock::now() > deadline) return res;
    for (int i = 0; i < n; ++i)
      free[i] = !((z[i] <= lb[i] && grad[i] > 0.0) || (z[i] >= ub[i] && grad[i] < 0.0));
    Vector d = -mem.apply(grad, free);
    double slope = grad.dot(d);
    if (!(slope < 0.0)) {
      mem.pairs.clear();
      d = -mem.apply(grad, free);
      slope = grad.dot(d);
      if (!(slope < 0.0)) {
        res.converged = true;  // no descent direction among free variables
        return res;
      }
    }

    // Path derivative: components that are clipped do not move.
    auto trial = [&](double a, Vector& zt, Vector& gt, double& ft, double& dft) {
      zt = project(z + a * d, lb, ub);
      ft = phi.value(zt, gt);
      dft = 0.0;
      for (int i = 0; i < n; ++i) {
        const double raw = z[i] + a * d[i];
        if (raw > lb[i] && raw < ub[i]) dft += gt[i] * d[i];
      }
    };

    const double c1 = 1e-4;
    const double c2 = 0.9;
    double a = mem.pairs.empty() ? std::min(1.0, 1.0 / std::max(1e-12, d.lpNorm<Eigen::Infinity>())) : 1.0;
    double a_prev = 0.0, f_prev = f, df_prev = slope;
    Vector zt, gt;
    double ft = 0.0, dft = 0.0;
    bool accepted = false;
    Vector z_best;
    Vector g_best;
    double f_best = f;

    // Near the optimum f changes fall below rounding; the approximate Wolfe
    // test (Hager-Zhang) then accepts on the derivative alone.
    const double noise = 1e-12 * (1.0 + std::abs(f));
    auto sufficient = [&](double av, double fv, double dfv) {
      if (!std::isfinite(fv)) return false;
      if (fv <= f + c1 * av * slope) return true;
      return fv <= f + noise && dfv <= (2.0 * c1 - 1.0) * slope;
    };

    auto remember = [&](double fv) {
      if (fv < f_best) {
        f_best = fv;
        z_best = zt;
        g_best = gt;
      }
    };

    auto zoom = [&](double lo, double flo, double dflo, double hi, double fhi, double dfhi) {
      for (int j = 0; j < 30; ++j) {
        double aj;
        // Cubic interpolation, guarded toward bisection.
        const double d1 = dflo + dfhi - 3.0 * (flo - fhi) / (lo - hi);
        const double disc = d1 * d1 - dflo * dfhi;
        if (std::isfinite(fhi) && disc >= 0.0) {
          const double d2 = std::copysign(std::sqrt(disc), hi - lo);
          aj = hi - (hi - lo) * (dfhi + d2 - d1) / (dfhi - dflo + 2.0 * d2);
        } else {
          aj = 0.5 * (lo + hi);
        }
        const double left = std::min(lo, hi), right = std::max(lo, hi);
        const double width = right - left;
        if (!std::isfinite(aj) || aj < left + 0.1 * width || aj > right - 0.1 * width) aj = 0.5 * (lo + hi);
        trial(aj, zt, gt, ft, dft);
        if (!sufficient(aj, ft, dft) || ft >= flo + noise) {
          hi = aj;
          fhi = ft;
          dfhi = dft;
        } else {
          remember(ft);
          if (std::abs(dft) <= -c2 * slope) return true;
          if (dft * (hi - lo) >= 0.0) {
            hi = lo;
            fhi = flo;
            dfhi = dflo;
          }
          lo = aj;
          flo = ft;
          dflo = dft;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
      }
      return false;
    };

    for (int j = 0; j < 40; ++j) {
      trial(a, zt, gt, ft, dft);
      if (!sufficient(a, ft, dft) || (j > 0 && ft >= f_prev + noise)) {
        accepted = zoom(a_prev, f_prev, df_prev, a, ft, dft);
        break;
      }
      remember(ft);
      if (std::abs(dft) <= -c2 * slope) {
        accepted = true;
        break;
      }
      if (dft >= 0.0) {
        accepted = zoom(a, ft, dft, a_prev, f_prev, df_prev);
        break;
      }
      a_prev = a;
      f_prev = ft;
      df_prev = dft;
      a *= 2.0;
    }
    if (!accepted) {
      if (z_best.size() == n) {
        zt = z_best;
        gt = g_best;
        ft = f_best;
      } else {
        ++failures;
        mem.pairs.clear();
        if (failures > 2) return res;
        continue;
      }
    }
    failures = 0;
    mem.push(zt - z, gt - grad);
    z = zt;
    grad = gt;
    f = ft;
  }
  res.iterations = max_iter;
  return res;
}

void bound_multipliers(const Vector& z, const Vector& grad_l, const Vector& lb, const Vector& ub, Vector& zl,
                       Vector& zu) {
  const int n = static_cast<int>(z.size());
  zl = Vector::Zero(n);
  zu = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (z[i] <= lb[i] && grad_l[i] > 0.0) zl[i] = grad_l[i];
    if (z[i] >= ub[i] && grad_l[i] < 0.0) zu[i] = -grad_l[i];
  }
}

}  // namespace

NlpSolution solve(const NlpProblem& p, const SolverOptions& opts) {
  const auto start = Clock::now();
  const auto deadline = std::isfinite(opts.max_wall_time)
                            ? start + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(opts.max_wall_time))
                            : Clock::time_point::max();
  const int m = p.num_constraints();
  const Vector& lb = p.variable_lower();
  const Vector& ub = p.variable_upper();
  const Vector& gl = p.constraint_lower();
  const Vector& gu = p.constraint_upper();

  NlpSolution sol;
  sol.z = default_start(p, opts);
  AugmentedLagrangian phi(p);
  phi.rho = opts.initial_penalty;
  phi.lambda = (opts.warmstart_lambda && opts.warmstart_lambda->size() == m) ? *opts.warmstart_lambda
                                                                               : Vector(Vector::Zero(m));

  double eps = std::max(opts.tol, 1e-2);
  double v_prev = std::numeric_limits<double>::infinity();
  int stalled = 0;
  int total_inner = 0;
  auto finish = [&](SolveStatus status, const std::string& msg) {
    sol.status = status;
    sol.message = msg;
    sol.iterations = total_inner;
    sol.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    return sol;
  };

  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    const InnerResult inner =
        minimize_box(phi, sol.z, lb, ub, eps, opts.max_inner_iterations, opts.lbfgs_memory, deadline);
    total_inner += inner.iterations;
    if (inner.numerical_error) return finish(SolveStatus::numerical_error, "non-finite augmented Lagrangian");

    // Multiplier update and violation measure (uses the pre-update lambda).
    Vector g = Vector::Zero(m);
    if (m > 0) p.constraints(sol.z, g);
    double violation = 0.0;
    Vector lambda_new(m);
    for (int i = 0; i < m; ++i) {
      const double t = g[i] + phi.lambda[i] / phi.rho;
      const double s = std::clamp(t, gl[i], gu[i]);
      lambda_new[i] = phi.rho * (t - s);
      violation = std::max(violation, std::abs(g[i] - std::clamp(g[i] + phi.lambda[i] / phi.rho, gl[i], gu[i])));
    }
    phi.lambda = lambda_new;

    Vector grad_l;
    p.objective_gradient(sol.z, grad_l);
    if (m > 0) {
      SparseMatrix jac = p.jacobian_structure();
      p.jacobian(sol.z, jac);
      grad_l += jac.transpose() * phi.lambda;
    }
    bound_multipliers(sol.z, grad_l, lb, ub, sol.z_lower, sol.z_upper);
    sol.lambda = phi.lambda;
    sol.objective = p.objective(sol.z);
    sol.kkt_residual = kkt_residual(p, sol.z, sol.lambda, sol.z_lower, sol.z_upper);
    sol.constraint_violation = constraint_violation(p, sol.z);
    if (opts.log) {
      std::ostringstream os;
      os << "al " << outer << " obj " << sol.objective << " viol " << sol.constraint_violation << " kkt "
         << sol.kkt_residual << " rho " << phi.rho << " inner " << inner.iterations;
      opts.log(os.str());
    }
    if (!std::isfinite(sol.kkt_residual)) return finish(SolveStatus::numerical_error, "non-finite KKT residual");
    if (sol.kkt_residual <= opts.tol && sol.constraint_violation <= opts.tol)
      return finish(SolveStatus::optimal, "converged");
    if (Clock::now() > deadline) return finish(SolveStatus::max_iter, "wall-clock limit reached");

    if (violation > 0.25 * v_prev && violation > 0.1 * opts.tol) {
      if (phi.rho >= opts.max_penalty && violation > opts.tol) {
        if (++stalled >= 3) return finish(SolveStatus::infeasible, "constraint violation stalled at maximum penalty");
      }
      phi.rho = std::min(phi.rho * opts.penalty_growth, opts.max_penalty);
    } else {
      stalled = 0;
    }
    v_prev = violation;
    eps = std::max(0.5 * opts.tol, 0.1 * eps);
  }
  return finish(SolveStatus::max_iter, "outer iteration limit reached");
}

}  // namespace raceopt::nlp
