#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "raceopt/nlp/dual.hpp"
#include "raceopt/nlp/problem.hpp"

namespace raceopt::nlp {

/// Smooth map from a few local inputs to a few outputs, with exact first and
/// second derivatives.
class BlockFunction {
 public:
  virtual ~BlockFunction() = default;
  virtual int num_inputs() const = 0;
  virtual int num_outputs() const = 0;
  virtual void value(const double* in, double* out) const = 0;
  /// jac is row-major num_outputs x num_inputs.
  virtual void jacobian(const double* in, double* out, double* jac) const = 0;
  /// hess (row-major num_inputs^2) = sum_o weights[o] * hess(out_o).
  virtual void hessian(const double* in, const double* weights, double* hess) const = 0;
};

/// BlockFunction differentiated by forward-mode duals. F must provide
///   template <class T> void operator()(const T* in, T* out) const;
template <int NIn, int NOut, class F>
class AdBlock final : public BlockFunction {
 public:
  explicit AdBlock(F f) : f_(std::move(f)) {}

  int num_inputs() const override { return NIn; }
  int num_outputs() const override { return NOut; }

  void value(const double* in, double* out) const override { f_(in, out); }

  void jacobian(const double* in, double* out, double* jac) const override {
    using J = ad::Jet<NIn>;
    J x[NIn];
    J y[NOut];
    for (int i = 0; i < NIn; ++i) x[i] = J::variable(in[i], i);
    f_(static_cast<const J*>(x), static_cast<J*>(y));
    for (int o = 0; o < NOut; ++o) {
      out[o] = y[o].v;
      for (int i = 0; i < NIn; ++i) jac[o * NIn + i] = y[o].d[i];
    }
  }

  void hessian(const double* in, const double* weights, double* hess) const override {
    using J = ad::Jet<NIn>;
    using H = ad::Jet2<NIn>;
    H x[NIn];
    H y[NOut];
    for (int i = 0; i < NIn; ++i) {
      x[i].v = J::variable(in[i], i);
      x[i].d[i] = J(1.0);
    }
    f_(static_cast<const H*>(x), static_cast<H*>(y));
    for (int k = 0; k < NIn * NIn; ++k) hess[k] = 0.0;
    for (int o = 0; o < NOut; ++o) {
      const double w = weights[o];
      if (w == 0.0) continue;
      for (int i = 0; i < NIn; ++i)
        for (int j = 0; j < NIn; ++j) hess[i * NIn + j] += w * y[o].d[i].d[j];
    }
  }

 private:
  F f_;
};

template <int NIn, int NOut, class F>
std::shared_ptr<const BlockFunction> make_block(F f) {
  return std::make_shared<AdBlock<NIn, NOut, F>>(std::move(f));
}

/// NLP assembled from linear terms, a quadratic objective, and nonlinear
/// blocks whose outputs feed constraint rows and the objective:
///   f(z) = c'z + sum q_ij z_i z_j + sum_b w_b' phi_b(z_b)
///   g(z) = A z + sum_b B_b phi_b(z_b)
/// Build with the add_* calls, then finalize() before solving.
class StructuredNlp final : public NlpProblem {
 public:
  StructuredNlp() = default;

  int add_variables(int count, double lower, double upper, double initial, const std::string& name = "z");
  int add_constraints(int count, double lower, double upper, const std::string& name = "g");

  void set_variable_bounds(int i, double lower, double upper);
  void set_initial(int i, double value) { initial_[i] = value; }
  void set_constraint_bounds(int row, double lower, double upper);

  void add_linear(int row, int col, double coef);
  void add_objective_linear(int col, double coef);
  /// Adds coef * z_i * z_j to the objective.
  void add_objective_quadratic(int i, int j, double coef);

  int add_block(std::shared_ptr<const BlockFunction> fn, std::vector<int> vars);
  void map_output(int block, int output, int row, double coef);
  void map_output_to_objective(int block, int output, double weight);

  void finalize();
  bool finalized() const { return finalized_; }

  const Vector& initial_point() const { return initial_; }

  /// Callback evaluation worker count (1 = serial). Results are identical for
  /// any thread count.
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }

  // NlpProblem
  int num_variables() const override { return static_cast<int>(var_lower_.size()); }
  int num_constraints() const override { return static_cast<int>(con_lower_.size()); }
  const Vector& variable_lower() const override { return var_lower_; }
  const Vector& variable_upper() const override { return var_upper_; }
  const Vector& constraint_lower() const override { return con_lower_; }
  const Vector& constraint_upper() const override { return con_upper_; }
  double objective(const Vector& z) const override;
  void objective_gradient(const Vector& z, Vector& grad) const override;
  void constraints(const Vector& z, Vector& g) const override;
  SparseMatrix jacobian_structure() const override { return jac_structure_; }
  void jacobian(const Vector& z, SparseMatrix& jac) const override;
  bool has_hessian() const override { return true; }
  SparseMatrix hessian_structure() const override { return hess_structure_; }
  void hessian(const Vector& z, double obj_factor, const Vector& lambda, SparseMatrix& hess) const override;
  std::string variable_name(int i) const override;
  std::string constraint_name(int i) const override;

 private:
  struct Term {
    int row;
    double coef;
  };
  struct Block {
    std::shared_ptr<const BlockFunction> fn;
    std::vector<int> vars;
    std::vector<std::vector<Term>> rows;  // per output
    std::vector<double> objective;        // per output
    bool feeds_objective = false;
    // Filled by finalize().
    std::vector<int> jac_pos;   // per (output, term, input)
    std::vector<int> hess_pos;  // per (i, j) with j <= i in local order, -1 if unused
  };
  struct NameRange {
    int first;
    int count;
    std::string name;
  };

  void require_finalized() const;
  void require_open() const;
  template <class Fn>
  void for_blocks(Fn&& fn) const;

  Vector var_lower_, var_upper_, initial_;
  Vector con_lower_, con_upper_;
  std::vector<NameRange> var_names_, con_names_;

  std::vector<Eigen::Triplet<double>> linear_;
  Vector obj_linear_;
  std::vector<Eigen::Triplet<double>> obj_quad_;  // (i, j, coef) as added
  std::vector<Block> blocks_;

  SparseMatrix linear_matrix_;  // A
  SparseMatrix quad_matrix_;    // symmetric Q with f = 1/2 z'Qz
  SparseMatrix jac_structure_;
  SparseMatrix hess_structure_;
  std::vector<int> jac_linear_pos_;  // per nonzero of A (column-major order)
  std::vector<int> hess_quad_pos_;   // per lower nonzero of Q (column-major order)
  int threads_ = 1;
  bool finalized_ = false;
};

}  // namespace raceopt::nlp
