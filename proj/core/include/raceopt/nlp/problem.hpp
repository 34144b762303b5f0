#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <limits>
#include <string>

namespace raceopt::nlp {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;  // column major

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nonlinear program
///   min f(z)  s.t.  g_lb <= g(z) <= g_ub,  z_lb <= z <= z_ub.
/// Callbacks must be pure functions of z. Sparse matrices returned by the
/// *_structure() calls fix the nonzero pattern; evaluation overwrites values
/// in place and never changes the pattern.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;

  virtual const Vector& variable_lower() const = 0;
  virtual const Vector& variable_upper() const = 0;
  virtual const Vector& constraint_lower() const = 0;
  virtual const Vector& constraint_upper() const = 0;

  virtual double objective(const Vector& z) const = 0;
  virtual void objective_gradient(const Vector& z, Vector& grad) const = 0;
  virtual void constraints(const Vector& z, Vector& g) const = 0;

  virtual SparseMatrix jacobian_structure() const = 0;
  virtual void jacobian(const Vector& z, SparseMatrix& jac) const = 0;

  /// Lower triangle of obj_factor * hess(f) + sum_i lambda_i * hess(g_i).
  virtual bool has_hessian() const { return false; }
  virtual SparseMatrix hessian_structure() const;
  virtual void hessian(const Vector& z, double obj_factor, const Vector& lambda, SparseMatrix& hess) const;

  virtual std::string variable_name(int i) const { return "z[" + std::to_string(i) + "]"; }
  virtual std::string constraint_name(int i) const { return "g[" + std::to_string(i) + "]"; }
};

}  // namespace raceopt::nlp
