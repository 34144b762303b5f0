#include "raceopt/nlp/structured.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "raceopt/common/error.hpp"

namespace raceopt::nlp {

SparseMatrix NlpProblem::hessian_structure() const {
  return SparseMatrix(num_variables(), num_variables());
}

void NlpProblem::hessian(const Vector&, double, const Vector&, SparseMatrix&) const {
  throw Error(ErrorCode::invalid_argument, "problem provides no Hessian");
}

namespace {

int find_position(const SparseMatrix& m, int row, int col) {
  const int* inner = m.innerIndexPtr();
  const int begin = m.outerIndexPtr()[col];
  const int end = m.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(inner + begin, inner + end, row);
  if (it == inner + end || *it != row) throw Error(ErrorCode::invalid_argument, "sparsity pattern lookup failed");
  return static_cast<int>(it - inner);
}

}  // namespace

int StructuredNlp::add_variables(int count, double lower, double upper, double initial, const std::string& name) {
  require_open();
  if (lower > upper) throw Error(ErrorCode::infeasible_bounds, "variable '" + name + "' has lower > upper");
  const int first = num_variables();
  const int n = first + count;
  var_lower_.conservativeResize(n);
  var_upper_.conservativeResize(n);
  initial_.conservativeResize(n);
  obj_linear_.conservativeResize(n);
  for (int i = first; i < n; ++i) {
    var_lower_[i] = lower;
    var_upper_[i] = upper;
    initial_[i] = initial;
    obj_linear_[i] = 0.0;
  }
  var_names_.push_back({first, count, name});
  return first;
}

int StructuredNlp::add_constraints(int count, double lower, double upper, const std::string& name) {
  require_open();
  if (lower > upper) throw Error(ErrorCode::infeasible_bounds, "constraint '" + name + "' has lower > upper");
  const int first = num_constraints();
  const int m = first + count;
  con_lower_.conservativeResize(m);
  con_upper_.conservativeResize(m);
  for (int i = first; i < m; ++i) {
    con_lower_[i] = lower;
    con_upper_[i] = upper;
  }
  con_names_.push_back({first, count, name});
  return first;
}

void StructuredNlp::set_variable_bounds(int i, double lower, double upper) {
  if (lower > upper) throw Error(ErrorCode::infeasible_bounds, variable_name(i) + " has lower > upper");
  var_lower_[i] = lower;
  var_upper_[i] = upper;
}

void StructuredNlp::set_constraint_bounds(int row, double lower, double upper) {
  if (lower > upper) throw Error(ErrorCode::infeasible_bounds, constraint_name(row) + " has lower > upper");
  con_lower_[row] = lower;
  con_upper_[row] = upper;
}

void StructuredNlp::add_linear(int row, int col, double coef) {
  require_open();
  linear_.emplace_back(row, col, coef);
}

void StructuredNlp::add_objective_linear(int col, double coef) {
  require_open();
  obj_linear_[col] += coef;
}

void StructuredNlp::add_objective_quadratic(int i, int j, double coef) {
  require_open();
  obj_quad_.emplace_back(i, j, coef);
}

int StructuredNlp::add_block(std::shared_ptr<const BlockFunction> fn, std::vector<int> vars) {
  require_open();
  if (static_cast<int>(vars.size()) != fn->num_inputs())
    throw Error(ErrorCode::invalid_argument, "block input count does not match its variable list");
  std::vector<int> sorted = vars;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorCode::invalid_argument, "block variable list contains duplicates");
  Block b;
  b.rows.resize(static_cast<std::size_t>(fn->num_outputs()));
  b.objective.assign(static_cast<std::size_t>(fn->num_outputs()), 0.0);
  b.fn = std::move(fn);
  b.vars = std::move(vars);
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

void StructuredNlp::map_output(int block, int output, int row, double coef) {
  require_open();
  blocks_[block].rows[output].push_back({row, coef});
}

void StructuredNlp::map_output_to_objective(int block, int output, double weight) {
  require_open();
  blocks_[block].objective[output] += weight;
  blocks_[block].feeds_objective = true;
}

void StructuredNlp::require_finalized() const {
  if (!finalized_) throw Error(ErrorCode::invalid_argument, "StructuredNlp used before finalize()");
}

void StructuredNlp::require_open() const {
  if (finalized_) throw Error(ErrorCode::invalid_argument, "StructuredNlp modified after finalize()");
}

void StructuredNlp::finalize() {
  require_open();
  const int n = num_variables();
  const int m = num_constraints();

  linear_matrix_.resize(m, n);
  linear_matrix_.setFromTriplets(linear_.begin(), linear_.end());
  linear_matrix_.makeCompressed();

  std::vector<Eigen::Triplet<double>> q;
  for (const auto& t : obj_quad_) {
    if (t.row() == t.col()) {
      q.emplace_back(t.row(), t.col(), 2.0 * t.value());
    } else {
      q.emplace_back(t.row(), t.col(), t.value());
      q.emplace_back(t.col(), t.row(), t.value());
    }
  }
  quad_matrix_.resize(n, n);
  quad_matrix_.setFromTriplets(q.begin(), q.end());
  quad_matrix_.makeCompressed();

  // Jacobian pattern.
  std::vector<Eigen::Triplet<double>> jt;
  for (int k = 0; k < linear_matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(linear_matrix_, k); it; ++it) jt.emplace_back(it.row(), it.col(), 0.0);
  for (const auto& b : blocks_)
    for (const auto& rows : b.rows)
      for (const auto& t : rows)
        for (int v : b.vars) jt.emplace_back(t.row, v, 0.0);
  jac_structure_.resize(m, n);
  jac_structure_.setFromTriplets(jt.begin(), jt.end());
  jac_structure_.makeCompressed();
  for (int k = 0; k < jac_structure_.nonZeros(); ++k) jac_structure_.valuePtr()[k] = 0.0;

  jac_linear_pos_.clear();
  for (int k = 0; k < linear_matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(linear_matrix_, k); it; ++it)
      jac_linear_pos_.push_back(find_position(jac_structure_, static_cast<int>(it.row()), static_cast<int>(it.col())));

  // Hessian pattern (lower triangle).
  std::vector<Eigen::Triplet<double>> ht;
  for (int k = 0; k < quad_matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(quad_matrix_, k); it; ++it)
      if (it.row() >= it.col()) ht.emplace_back(it.row(), it.col(), 0.0);
  for (const auto& b : blocks_) {
    const int ni = static_cast<int>(b.vars.size());
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j <= i; ++j) {
        const int r = std::max(b.vars[i], b.vars[j]);
        const int c = std::min(b.vars[i], b.vars[j]);
        ht.emplace_back(r, c, 0.0);
      }
  }
  hess_structure_.resize(n, n);
  hess_structure_.setFromTriplets(ht.begin(), ht.end());
  hess_structure_.makeCompressed();
  for (int k = 0; k < hess_structure_.nonZeros(); ++k) hess_structure_.valuePtr()[k] = 0.0;

  hess_quad_pos_.clear();
  for (int k = 0; k < quad_matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(quad_matrix_, k); it; ++it)
      if (it.row() >= it.col())
        hess_quad_pos_.push_back(
            find_position(hess_structure_, static_cast<int>(it.row()), static_cast<int>(it.col())));

  for (auto& b : blocks_) {
    const int ni = static_cast<int>(b.vars.size());
    b.jac_pos.clear();
    for (const auto& rows : b.rows)
      for (const auto& t : rows)
        for (int v : b.vars) b.jac_pos.push_back(find_position(jac_structure_, t.row, v));
    b.hess_pos.assign(static_cast<std::size_t>(ni * ni), -1);
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j <= i; ++j) {
        const int r = std::max(b.vars[i], b.vars[j]);
        const int c = std::min(b.vars[i], b.vars[j]);
        b.hess_pos[i * ni + j] = find_position(hess_structure_, r, c);
      }
  }
  finalized_ = true;
}

template <class Fn>
void StructuredNlp::for_blocks(Fn&& fn) const {
  const int nb = static_cast<int>(blocks_.size());
  const int workers = std::min(threads_, std::max(1, nb / 16));
  if (workers <= 1) {
    for (int b = 0; b < nb; ++b) fn(b);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int b = w; b < nb; b += workers) fn(b);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double StructuredNlp::objective(const Vector& z) const {
  require_finalized();
  double f = obj_linear_.dot(z) + 0.5 * z.dot(quad_matrix_ * z);
  std::vector<double> in, out;
  for (const auto& b : blocks_) {
    if (!b.feeds_objective) continue;
    in.resize(b.vars.size());
    out.resize(b.rows.size());
    for (std::size_t i = 0; i < b.vars.size(); ++i) in[i] = z[b.vars[i]];
    b.fn->value(in.data(), out.data());
    for (std::size_t o = 0; o < out.size(); ++o) f += b.objective[o] * out[o];
  }
  return f;
}

void StructuredNlp::objective_gradient(const Vector& z, Vector& grad) const {
  require_finalized();
  grad = obj_linear_ + quad_matrix_ * z;
  std::vector<double> in, out, jac;
  for (const auto& b : blocks_) {
    if (!b.feeds_objective) continue;
    const std::size_t ni = b.vars.size();
    in.resize(ni);
    out.resize(b.rows.size());
    jac.resize(ni * out.size());
    for (std::size_t i = 0; i < ni; ++i) in[i] = z[b.vars[i]];
    b.fn->jacobian(in.data(), out.data(), jac.data());
    for (std::size_t o = 0; o < out.size(); ++o) {
      if (b.objective[o] == 0.0) continue;
      for (std::size_t i = 0; i < ni; ++i) grad[b.vars[i]] += b.objective[o] * jac[o * ni + i];
    }
  }
}

void StructuredNlp::constraints(const Vector& z, Vector& g) const {
  require_finalized();
  g = linear_matrix_ * z;
  const int nb = static_cast<int>(blocks_.size());
  std::vector<std::vector<double>> outs(static_cast<std::size_t>(nb));
  for_blocks([&](int k) {
    const auto& b = blocks_[k];
    std::vector<double> in(b.vars.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = z[b.vars[i]];
    outs[k].resize(b.rows.size());
    b.fn->value(in.data(), outs[k].data());
  });
  for (int k = 0; k < nb; ++k) {
    const auto& b = blocks_[k];
    for (std::size_t o = 0; o < b.rows.size(); ++o)
      for (const auto& t : b.rows[o]) g[t.row] += t.coef * outs[k][o];
  }
}

void StructuredNlp::jacobian(const Vector& z, SparseMatrix& jac) const {
  require_finalized();
  if (jac.nonZeros() != jac_structure_.nonZeros()) jac = jac_structure_;
  double* values = jac.valuePtr();
  std::fill(values, values + jac.nonZeros(), 0.0);
  const double* a = linear_matrix_.valuePtr();
  for (std::size_t k = 0; k < jac_linear_pos_.size(); ++k) values[jac_linear_pos_[k]] += a[k];

  const int nb = static_cast<int>(blocks_.size());
  std::vector<std::vector<double>> jacs(static_cast<std::size_t>(nb));
  for_blocks([&](int k) {
    const auto& b = blocks_[k];
    const std::size_t ni = b.vars.size();
    std::vector<double> in(ni), out(b.rows.size());
    for (std::size_t i = 0; i < ni; ++i) in[i] = z[b.vars[i]];
    jacs[k].resize(ni * out.size());
    b.fn->jacobian(in.data(), out.data(), jacs[k].data());
  });
  for (int k = 0; k < nb; ++k) {
    const auto& b = blocks_[k];
    const std::size_t ni = b.vars.size();
    std::size_t p = 0;
    for (std::size_t o = 0; o < b.rows.size(); ++o)
      for (const auto& t : b.rows[o])
        for (std::size_t i = 0; i < ni; ++i) values[b.jac_pos[p++]] += t.coef * jacs[k][o * ni + i];
  }
}

void StructuredNlp::hessian(const Vector& z, double obj_factor, const Vector& lambda, SparseMatrix& hess) const {
  require_finalized();
  if (hess.nonZeros() != hess_structure_.nonZeros()) hess = hess_structure_;
  double* values = hess.valuePtr();
  std::fill(values, values + hess.nonZeros(), 0.0);
  {
    std::size_t p = 0;
    for (int k = 0; k < quad_matrix_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(quad_matrix_, k); it; ++it)
        if (it.row() >= it.col()) values[hess_quad_pos_[p++]] += obj_factor * it.value();
  }
  const int nb = static_cast<int>(blocks_.size());
  std::vector<std::vector<double>> hs(static_cast<std::size_t>(nb));
  for_blocks([&](int k) {
    const auto& b = blocks_[k];
    const std::size_t no = b.rows.size();
    std::vector<double> w(no, 0.0);
    bool any = false;
    for (std::size_t o = 0; o < no; ++o) {
      w[o] = obj_factor * b.objective[o];
      for (const auto& t : b.rows[o]) w[o] += lambda[t.row] * t.coef;
      any = any || w[o] != 0.0;
    }
    if (!any) return;
    const std::size_t ni = b.vars.size();
    std::vector<double> in(ni);
    for (std::size_t i = 0; i < ni; ++i) in[i] = z[b.vars[i]];
    hs[k].resize(ni * ni);
    b.fn->hessian(in.data(), w.data(), hs[k].data());
  });
  for (int k = 0; k < nb; ++k) {
    if (hs[k].empty()) continue;
    const auto& b = blocks_[k];
    const int ni = static_cast<int>(b.vars.size());
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j <= i; ++j) values[b.hess_pos[i * ni + j]] += hs[k][i * ni + j];
  }
}

std::string StructuredNlp::variable_name(int i) const {
  for (const auto& r : var_names_)
    if (i >= r.first && i < r.first + r.count) return r.name + "[" + std::to_string(i - r.first) + "]";
  return NlpProblem::variable_name(i);
}

std::string StructuredNlp::constraint_name(int i) const {
  for (const auto& r : con_names_)
    if (i >= r.first && i < r.first + r.count) return r.name + "[" + std::to_string(i - r.first) + "]";
  return NlpProblem::constraint_name(i);
}

}  // namespace raceopt::nlp
