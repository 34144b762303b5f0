// Primal-dual interior point method with a filter line search.
//
// Fixed variables are removed. Inequality rows get a slack s with
// g(z) - s = 0 and the slack carries the bounds. The Newton system is
// condensed over the slacks and factorized by a sparse LDL^T; the inertia of
// the diagonal factor drives the Hessian regularization.

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "raceopt/common/error.hpp"
#include "raceopt/nlp/solver.hpp"

namespace raceopt::nlp {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTauMin = 0.99;
constexpr double kKappaEps = 10.0;
constexpr double kKappaMu = 0.2;
constexpr double kThetaMu = 1.5;
constexpr double kKappaSigma = 1e10;
constexpr double kGammaTheta = 1e-5;
constexpr double kGammaPhi = 1e-8;
constexpr double kEta = 1e-4;
constexpr double kSTheta = 1.1;
constexpr double kSPhi = 2.3;
constexpr double kDelta = 1.0;
constexpr double kGammaAlpha = 0.05;
constexpr double kKappaSoc = 0.99;
constexpr double kScaleTarget = 100.0;

int find_position(const SparseMatrix& m, int row, int col) {
  const int* inner = m.innerIndexPtr();
  const int begin = m.outerIndexPtr()[col];
  const int end = m.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(inner + begin, inner + end, row);
  if (it == inner + end || *it != row) throw Error(ErrorCode::invalid_argument, "KKT pattern lookup failed");
  return static_cast<int>(it - inner);
}

struct Iterate {
  Vector x;   // full variable vector (original units)
  Vector s;   // slacks, scaled row units
  Vector lam;  // scaled multipliers
  Vector zl, zu;  // free-variable bound duals (indexed by free position)
  Vector vl, vu;  // slack bound duals
};

struct Step {
  Vector dx;  // by free position
  Vector ds;
  Vector dlam;
  Vector dzl, dzu, dvl, dvu;
};


// Feasibility restoration problem around a reference point xr:
//   min rho * sum(p + n) + zeta/2 * sum (D (x - xr))^2
//   s.t. r .* g(x) - p + n in [r .* g_lb, r .* g_ub],  p, n >= 0
// with D = min(1, 1/|xr|). Variables are [x, p, n].
class RestorationProblem final : public NlpProblem {
 public:
  RestorationProblem(const NlpProblem& p, const Vector& row_scale, const Vector& xr, double rho, double zeta)
      : p_(p), r_(row_scale), xr_(xr), rho_(rho), zeta_(zeta) {
    n_ = p.num_variables();
    m_ = p.num_constraints();
    d2_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const double d = std::min(1.0, 1.0 / std::max(1e-300, std::abs(xr[i])));
      d2_[i] = d * d;
    }
    lower_.resize(n_ + 2 * m_);
    upper_.resize(n_ + 2 * m_);
    lower_ << p.variable_lower(), Vector::Zero(2 * m_);
    upper_ << p.variable_upper(), Vector::Constant(2 * m_, kInf);
    glo_ = r_.cwiseProduct(p.constraint_lower());
    ghi_ = r_.cwiseProduct(p.constraint_upper());
    for (int i = 0; i < m_; ++i) {
      if (!std::isfinite(p.constraint_lower()[i])) glo_[i] = -kInf;
      if (!std::isfinite(p.constraint_upper()[i])) ghi_[i] = kInf;
    }
    jac0_ = p.jacobian_structure();
    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < jac0_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(jac0_, col); e; ++e) t.emplace_back(e.row(), e.col(), 0.0);
    for (int i = 0; i < m_; ++i) {
      t.emplace_back(i, n_ + i, -1.0);
      t.emplace_back(i, n_ + m_ + i, 1.0);
    }
    jac_.resize(m_, n_ + 2 * m_);
    jac_.setFromTriplets(t.begin(), t.end());
    jac_.makeCompressed();

    hess0_ = p.hessian_structure();
    t.clear();
    for (int col = 0; col < hess0_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(hess0_, col); e; ++e)
        if (e.row() >= e.col()) t.emplace_back(e.row(), e.col(), 0.0);
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, 0.0);
    hess_.resize(n_ + 2 * m_, n_ + 2 * m_);
    hess_.setFromTriplets(t.begin(), t.end());
    hess_.makeCompressed();
    hess_pos_.assign(static_cast<std::size_t>(hess0_.nonZeros()), -1);
    for (int col = 0; col < hess0_.outerSize(); ++col)
      for (int k = hess0_.outerIndexPtr()[col]; k < hess0_.outerIndexPtr()[col + 1]; ++k) {
        const int row = hess0_.innerIndexPtr()[k];
        if (row >= col) hess_pos_[k] = find_position(hess_, row, col);
      }
    diag_pos_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) diag_pos_[i] = find_position(hess_, i, i);
  }

  int num_variables() const override { return n_ + 2 * m_; }
  int num_constraints() const override { return m_; }
  const Vector& variable_lower() const override { return lower_; }
  const Vector& variable_upper() const override { return upper_; }
  const Vector& constraint_lower() const override { return glo_; }
  const Vector& constraint_upper() const override { return ghi_; }

  double objective(const Vector& z) const override {
    const Vector dx = z.head(n_) - xr_;
    return rho_ * z.tail(2 * m_).sum() + 0.5 * zeta_ * dx.cwiseProduct(dx).dot(d2_);
  }
  void objective_gradient(const Vector& z, Vector& grad) const override {
    grad.resize(n_ + 2 * m_);
    grad.head(n_) = zeta_ * d2_.cwiseProduct(z.head(n_) - xr_);
    grad.tail(2 * m_).setConstant(rho_);
  }
  void constraints(const Vector& z, Vector& g) const override {
    Vector g0;
    p_.constraints(z.head(n_), g0);
    g = r_.cwiseProduct(g0) - z.segment(n_, m_) + z.tail(m_);
  }
  SparseMatrix jacobian_structure() const override { return jac_; }
  void jacobian(const Vector& z, SparseMatrix& jac) const override {
    p_.jacobian(z.head(n_), jac0_);
    // The x columns share the original pattern and come first.
    int k = 0;
    for (int col = 0; col < jac0_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(jac0_, col); e; ++e) jac.valuePtr()[k++] = r_[e.row()] * e.value();
  }
  bool has_hessian() const override { return true; }
  SparseMatrix hessian_structure() const override { return hess_; }
  void hessian(const Vector& z, double obj_factor, const Vector& lambda, SparseMatrix& hess) const override {
    p_.hessian(z.head(n_), 0.0, r_.cwiseProduct(lambda), hess0_);
    double* v = hess.valuePtr();
    std::fill(v, v + hess.nonZeros(), 0.0);
    const double* h0 = hess0_.valuePtr();
    for (std::size_t k = 0; k < hess_pos_.size(); ++k)
      if (hess_pos_[k] >= 0) v[hess_pos_[k]] += h0[k];
    for (int i = 0; i < n_; ++i) v[diag_pos_[i]] += obj_factor * zeta_ * d2_[i];
  }

 private:
  const NlpProblem& p_;
  Vector r_, xr_, d2_;
  double rho_, zeta_;
  int n_ = 0, m_ = 0;
  Vector lower_, upper_, glo_, ghi_;
  mutable SparseMatrix jac0_, hess0_;
  SparseMatrix jac_, hess_;
  std::vector<int> hess_pos_, diag_pos_;
};

class InteriorPoint {
 public:
  using StopTest = std::function<bool(const Vector&)>;
  InteriorPoint(const NlpProblem& p, const SolverOptions& o, bool allow_restoration = true, StopTest stop = {})
      : p_(p), o_(o), allow_restoration_(allow_restoration), stop_(std::move(stop)) {}

  NlpSolution run();

 private:
  // Problem layout.
  void setup();
  void build_kkt_pattern();
  Vector push_inside(const Vector& v, const Vector& lo, const Vector& hi, double push) const;

  // Evaluation.
  bool eval_values(const Vector& x, const Vector& s, double& f, Vector& c) const;
  bool eval_derivatives(const Iterate& it);
  double theta(const Vector& c) const { return c.lpNorm<1>(); }

  // Residuals at the current iterate.
  void residual_vectors(const Iterate& it, Vector& rx, Vector& rs) const;
  double optimality_error(const Iterate& it, double mu) const;

  // Linear algebra.
  void fill_kkt(const Iterate& it, double delta_w, double delta_c, bool lsq);
  bool factorize_with_inertia(const Iterate& it, double& delta_w, double& delta_c);
  Vector solve_kkt(const Vector& rhs) const;
  void compute_step(const Iterate& it, const Vector& rx, const Vector& rs, const Vector& c, double delta_w,
                    Step& d) const;
  void complete_step(const Iterate& it, double mu, double delta_w, Step& d) const;
  double primal_fraction(const Iterate& it, const Step& d, double tau) const;
  double dual_fraction(const Iterate& it, const Step& d, double tau) const;
  Iterate trial(const Iterate& it, const Step& d, double alpha_p, double alpha_d) const;
  void least_squares_multipliers(Iterate& it);
  void safeguard_duals(Iterate& it, double mu) const;
  NlpSolution make_solution(const Iterate& it, SolveStatus status, const std::string& msg, int iters) const;

  const NlpProblem& p_;
  const SolverOptions& o_;
  bool allow_restoration_ = true;
  StopTest stop_;
  bool stopped_ = false;
  int n_ = 0, m_ = 0, nf_ = 0, ns_ = 0;
  std::vector<int> free_;       // free position -> variable
  std::vector<int> pos_;        // variable -> free position or -1
  std::vector<int> slack_row_;  // slack -> row
  std::vector<int> row_slack_;  // row -> slack or -1
  Vector xl_, xu_;              // bounds by free position
  std::vector<char> has_xl_, has_xu_;
  Vector sl_, su_;  // slack bounds (scaled)
  std::vector<char> has_sl_, has_su_;
  Vector eq_rhs_;   // scaled rhs of equality rows
  double obj_scale_ = 1.0;
  Vector row_scale_;

  // Current derivative data.
  Vector grad_;  // original objective gradient (full n)
  SparseMatrix jac_;
  SparseMatrix hess_;
  Vector jt_lam_;  // J' (row_scale .* lam), full n

  // KKT.
  SparseMatrix kkt_;
  std::vector<int> kkt_hess_pos_;
  std::vector<int> kkt_jac_pos_;
  std::vector<int> kkt_diag_pos_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  Vector sigma_s_;  // condensed slack weights, by slack
  double delta_c_last_ = 0.0;
  mutable long evals_ = 0;
};

void InteriorPoint::setup() {
  n_ = p_.num_variables();
  m_ = p_.num_constraints();
  const Vector& lb = p_.variable_lower();
  const Vector& ub = p_.variable_upper();
  pos_.assign(static_cast<std::size_t>(n_), -1);
  for (int i = 0; i < n_; ++i) {
    if (lb[i] > ub[i]) throw Error(ErrorCode::infeasible_bounds, p_.variable_name(i) + " has lower > upper");
    if (lb[i] < ub[i]) {
      pos_[i] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  nf_ = static_cast<int>(free_.size());
  xl_.resize(nf_);
  xu_.resize(nf_);
  has_xl_.resize(static_cast<std::size_t>(nf_));
  has_xu_.resize(static_cast<std::size_t>(nf_));
  for (int k = 0; k < nf_; ++k) {
    xl_[k] = lb[free_[k]];
    xu_[k] = ub[free_[k]];
    has_xl_[k] = std::isfinite(xl_[k]);
    has_xu_[k] = std::isfinite(xu_[k]);
  }
  const Vector& gl = p_.constraint_lower();
  const Vector& gu = p_.constraint_upper();
  row_slack_.assign(static_cast<std::size_t>(m_), -1);
  for (int i = 0; i < m_; ++i) {
    if (gl[i] > gu[i]) throw Error(ErrorCode::infeasible_bounds, p_.constraint_name(i) + " has lower > upper");
    if (gl[i] < gu[i]) {
      row_slack_[i] = static_cast<int>(slack_row_.size());
      slack_row_.push_back(i);
    }
  }
  ns_ = static_cast<int>(slack_row_.size());
  jac_ = p_.jacobian_structure();
  hess_ = p_.hessian_structure();
}

Vector InteriorPoint::push_inside(const Vector& v, const Vector& lo, const Vector& hi, double push) const {
  Vector r = v;
  for (int i = 0; i < v.size(); ++i) {
    const bool fl = std::isfinite(lo[i]);
    const bool fu = std::isfinite(hi[i]);
    double pl = 0.0, pu = 0.0;
    if (fl) pl = push * std::max(1.0, std::abs(lo[i]));
    if (fu) pu = push * std::max(1.0, std::abs(hi[i]));
    if (fl && fu) {
      pl = std::min(pl, push * (hi[i] - lo[i]));
      pu = std::min(pu, push * (hi[i] - lo[i]));
    }
    if (fl) r[i] = std::max(r[i], lo[i] + pl);
    if (fu) r[i] = std::min(r[i], hi[i] - pu);
    if (fl && fu && !(r[i] > lo[i] && r[i] < hi[i])) r[i] = 0.5 * (lo[i] + hi[i]);
  }
  return r;
}

bool InteriorPoint::eval_values(const Vector& x, const Vector& s, double& f, Vector& c) const {
  ++evals_;
  f = p_.objective(x);
  if (!std::isfinite(f)) return false;
  c.resize(m_);
  if (m_ == 0) return true;
  Vector g;
  p_.constraints(x, g);
  for (int i = 0; i < m_; ++i) {
    const double gs = row_scale_[i] * g[i];
    c[i] = row_slack_[i] < 0 ? gs - eq_rhs_[i] : gs - s[row_slack_[i]];
  }
  return c.allFinite();
}

bool InteriorPoint::eval_derivatives(const Iterate& it) {
  p_.objective_gradient(it.x, grad_);
  if (!grad_.allFinite()) return false;
  if (m_ > 0) {
    p_.jacobian(it.x, jac_);
    const Eigen::Map<const Vector> jv(jac_.valuePtr(), jac_.nonZeros());
    if (!jv.allFinite()) return false;
  }
  Vector lam_eff = row_scale_.cwiseProduct(it.lam);
  jt_lam_ = m_ > 0 ? Vector(jac_.transpose() * lam_eff) : Vector(Vector::Zero(n_));
  p_.hessian(it.x, obj_scale_, lam_eff, hess_);
  const Eigen::Map<const Vector> hv(hess_.valuePtr(), hess_.nonZeros());
  return hv.allFinite();
}

void InteriorPoint::residual_vectors(const Iterate& it, Vector& rx, Vector& rs) const {
  // Dual residuals without the bound duals: grad f + J'lam (free part) and -lam_I.
  rx.resize(nf_);
  for (int k = 0; k < nf_; ++k) rx[k] = obj_scale_ * grad_[free_[k]] + jt_lam_[free_[k]];
  rs.resize(ns_);
  for (int j = 0; j < ns_; ++j) rs[j] = -it.lam[slack_row_[j]];
}

double InteriorPoint::optimality_error(const Iterate& it, double mu) const {
  Vector rx, rs;
  residual_vectors(it, rx, rs);
  double dual = 0.0, compl_ = 0.0;
  for (int k = 0; k < nf_; ++k) {
    dual = std::max(dual, std::abs(rx[k] - it.zl[k] + it.zu[k]));
    if (has_xl_[k]) compl_ = std::max(compl_, std::abs(it.zl[k] * (it.x[free_[k]] - xl_[k]) - mu));
    if (has_xu_[k]) compl_ = std::max(compl_, std::abs(it.zu[k] * (xu_[k] - it.x[free_[k]]) - mu));
  }
  for (int j = 0; j < ns_; ++j) {
    dual = std::max(dual, std::abs(rs[j] - it.vl[j] + it.vu[j]));
    if (has_sl_[j]) compl_ = std::max(compl_, std::abs(it.vl[j] * (it.s[j] - sl_[j]) - mu));
    if (has_su_[j]) compl_ = std::max(compl_, std::abs(it.vu[j] * (su_[j] - it.s[j]) - mu));
  }
  const double zsum = it.zl.lpNorm<1>() + it.zu.lpNorm<1>() + it.vl.lpNorm<1>() + it.vu.lpNorm<1>();
  const double count = std::max(1, 2 * nf_ + 2 * ns_ + m_);
  const double sd = std::max(kScaleTarget, (zsum + it.lam.lpNorm<1>()) / count) / kScaleTarget;
  const double sc = std::max(kScaleTarget, zsum / std::max(1, 2 * nf_ + 2 * ns_)) / kScaleTarget;
  double f;
  Vector c;
  eval_values(it.x, it.s, f, c);
  const double primal = m_ > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max({dual / sd, primal, compl_ / sc});
}

void InteriorPoint::build_kkt_pattern() {
  const int nk = nf_ + m_;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < nk; ++i) t.emplace_back(i, i, 0.0);
  for (int col = 0; col < hess_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(hess_, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (r < c || pos_[r] < 0 || pos_[c] < 0) continue;
      t.emplace_back(pos_[r], pos_[c], 0.0);
    }
  for (int col = 0; col < jac_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(jac_, col); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (pos_[c] < 0) continue;
      t.emplace_back(nf_ + static_cast<int>(it.row()), pos_[c], 0.0);
    }
  kkt_.resize(nk, nk);
  kkt_.setFromTriplets(t.begin(), t.end());
  kkt_.makeCompressed();

  kkt_diag_pos_.resize(static_cast<std::size_t>(nk));
  for (int i = 0; i < nk; ++i) kkt_diag_pos_[i] = find_position(kkt_, i, i);
  kkt_hess_pos_.assign(static_cast<std::size_t>(hess_.nonZeros()), -1);
  for (int col = 0; col < hess_.outerSize(); ++col)
    for (int k = hess_.outerIndexPtr()[col]; k < hess_.outerIndexPtr()[col + 1]; ++k) {
      const int r = hess_.innerIndexPtr()[k];
      if (r < col || pos_[r] < 0 || pos_[col] < 0) continue;
      kkt_hess_pos_[k] = find_position(kkt_, pos_[r], pos_[col]);
    }
  kkt_jac_pos_.assign(static_cast<std::size_t>(jac_.nonZeros()), -1);
  for (int col = 0; col < jac_.outerSize(); ++col)
    for (int k = jac_.outerIndexPtr()[col]; k < jac_.outerIndexPtr()[col + 1]; ++k) {
      if (pos_[col] < 0) continue;
      kkt_jac_pos_[k] = find_position(kkt_, nf_ + jac_.innerIndexPtr()[k], pos_[col]);
    }
}

void InteriorPoint::fill_kkt(const Iterate& it, double delta_w, double delta_c, bool lsq) {
  double* v = kkt_.valuePtr();
  std::fill(v, v + kkt_.nonZeros(), 0.0);
  if (!lsq) {
    const double* hv = hess_.valuePtr();
    for (std::size_t k = 0; k < kkt_hess_pos_.size(); ++k)
      if (kkt_hess_pos_[k] >= 0) v[kkt_hess_pos_[k]] += hv[k];
  }
  for (int k = 0; k < nf_; ++k) {
    double d = delta_w;
    if (lsq) {
      d = 1.0;
    } else {
      const double x = it.x[free_[k]];
      if (has_xl_[k]) d += it.zl[k] / (x - xl_[k]);
      if (has_xu_[k]) d += it.zu[k] / (xu_[k] - x);
    }
    v[kkt_diag_pos_[k]] += d;
  }
  const double* jv = jac_.valuePtr();
  for (int col = 0; col < jac_.outerSize(); ++col)
    for (int k = jac_.outerIndexPtr()[col]; k < jac_.outerIndexPtr()[col + 1]; ++k)
      if (kkt_jac_pos_[k] >= 0) v[kkt_jac_pos_[k]] += row_scale_[jac_.innerIndexPtr()[k]] * jv[k];
  sigma_s_.resize(ns_);
  for (int j = 0; j < ns_; ++j) {
    double sg = lsq ? 1.0 : delta_w;
    if (!lsq) {
      if (has_sl_[j]) sg += it.vl[j] / (it.s[j] - sl_[j]);
      if (has_su_[j]) sg += it.vu[j] / (su_[j] - it.s[j]);
    }
    sigma_s_[j] = sg;
  }
  for (int i = 0; i < m_; ++i) {
    double d = -delta_c;
    if (row_slack_[i] >= 0) d -= 1.0 / sigma_s_[row_slack_[i]];
    v[kkt_diag_pos_[nf_ + i]] += d;
  }
}

bool InteriorPoint::factorize_with_inertia(const Iterate& it, double& delta_w, double& delta_c) {
  auto attempt = [&](double dw, double dc, bool& singular) {
    fill_kkt(it, dw, dc, false);
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    singular = false;
    if (ldlt_.info() != Eigen::Success) {
      singular = true;
      return false;
    }
    const Vector& d = ldlt_.vectorD();
    int npos = 0, nneg = 0;
    const double dmax = d.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i]) || d[i] == 0.0 || (dc == 0.0 && std::abs(d[i]) <= 1e-14 * dmax)) {
        singular = true;
        return false;
      }
      if (d[i] > 0.0) ++npos;
      else ++nneg;
    }
    return npos == nf_ && nneg == m_;
  };
  bool singular = false;
  delta_c = delta_c_last_;
  if (attempt(0.0, delta_c, singular)) {
    delta_w = 0.0;
    return true;
  }
  if (singular) delta_c = delta_c_last_ = 1e-8;
  double dw = 0.0;
  if (delta_c > 0.0 && attempt(0.0, delta_c, singular)) {
    delta_w = 0.0;
    return true;
  }
  dw = delta_w > 0.0 ? std::max(1e-20, delta_w / 3.0) : 1e-4;
  for (int k = 0; k < 60; ++k) {
    if (attempt(dw, delta_c, singular)) {
      delta_w = dw;
      return true;
    }
    if (singular && delta_c == 0.0) delta_c = delta_c_last_ = 1e-8;
    dw *= (delta_w > 0.0 ? 8.0 : 100.0);
    if (dw > 1e40) break;
  }
  return false;
}

Vector InteriorPoint::solve_kkt(const Vector& rhs) const {
  Vector sol = ldlt_.solve(rhs);
  for (int r = 0; r < 3; ++r) {
    Vector res = rhs - kkt_.selfadjointView<Eigen::Lower>() * sol;
    if (res.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) break;
    sol += ldlt_.solve(res);
  }
  return sol;
}

// Solves for (dx, dlam, ds) given the reduced residuals:
//   rx = grad phi_mu + J'lam (free part), rs = grad_s phi_mu - lam_I, c.
void InteriorPoint::compute_step(const Iterate& it, const Vector& rx, const Vector& rs, const Vector& c,
                                 double delta_w, Step& d) const {
  (void)it;
  (void)delta_w;
  Vector rhs(nf_ + m_);
  rhs.head(nf_) = -rx;
  for (int i = 0; i < m_; ++i) {
    const int j = row_slack_[i];
    rhs[nf_ + i] = -c[i] - (j >= 0 ? rs[j] / sigma_s_[j] : 0.0);
  }
  const Vector sol = solve_kkt(rhs);
  d.dx = sol.head(nf_);
  d.dlam = sol.tail(m_);
  d.ds.resize(ns_);
  for (int j = 0; j < ns_; ++j) d.ds[j] = (d.dlam[slack_row_[j]] - rs[j]) / sigma_s_[j];
}

void InteriorPoint::complete_step(const Iterate& it, double mu, double delta_w, Step& d) const {
  (void)delta_w;
  d.dzl = Vector::Zero(nf_);
  d.dzu = Vector::Zero(nf_);
  for (int k = 0; k < nf_; ++k) {
    const double x = it.x[free_[k]];
    if (has_xl_[k]) {
      const double gap = x - xl_[k];
      d.dzl[k] = (mu - it.zl[k] * gap - it.zl[k] * d.dx[k]) / gap;
    }
    if (has_xu_[k]) {
      const double gap = xu_[k] - x;
      d.dzu[k] = (mu - it.zu[k] * gap + it.zu[k] * d.dx[k]) / gap;
    }
  }
  d.dvl = Vector::Zero(ns_);
  d.dvu = Vector::Zero(ns_);
  for (int j = 0; j < ns_; ++j) {
    if (has_sl_[j]) {
      const double gap = it.s[j] - sl_[j];
      d.dvl[j] = (mu - it.vl[j] * gap - it.vl[j] * d.ds[j]) / gap;
    }
    if (has_su_[j]) {
      const double gap = su_[j] - it.s[j];
      d.dvu[j] = (mu - it.vu[j] * gap + it.vu[j] * d.ds[j]) / gap;
    }
  }
}

double InteriorPoint::primal_fraction(const Iterate& it, const Step& d, double tau) const {
  double a = 1.0;
  for (int k = 0; k < nf_; ++k) {
    const double x = it.x[free_[k]];
    if (has_xl_[k] && d.dx[k] < 0.0) a = std::min(a, -tau * (x - xl_[k]) / d.dx[k]);
    if (has_xu_[k] && d.dx[k] > 0.0) a = std::min(a, tau * (xu_[k] - x) / d.dx[k]);
  }
  for (int j = 0; j < ns_; ++j) {
    if (has_sl_[j] && d.ds[j] < 0.0) a = std::min(a, -tau * (it.s[j] - sl_[j]) / d.ds[j]);
    if (has_su_[j] && d.ds[j] > 0.0) a = std::min(a, tau * (su_[j] - it.s[j]) / d.ds[j]);
  }
  return a;
}

double InteriorPoint::dual_fraction(const Iterate& it, const Step& d, double tau) const {
  double a = 1.0;
  auto upd = [&](const Vector& z, const Vector& dz, const std::vector<char>& has) {
    for (int k = 0; k < z.size(); ++k)
      if (has[k] && dz[k] < 0.0) a = std::min(a, -tau * z[k] / dz[k]);
  };
  upd(it.zl, d.dzl, has_xl_);
  upd(it.zu, d.dzu, has_xu_);
  upd(it.vl, d.dvl, has_sl_);
  upd(it.vu, d.dvu, has_su_);
  return a;
}

Iterate InteriorPoint::trial(const Iterate& it, const Step& d, double ap, double ad) const {
  Iterate t = it;
  for (int k = 0; k < nf_; ++k) t.x[free_[k]] += ap * d.dx[k];
  t.s += ap * d.ds;
  t.lam += ap * d.dlam;
  t.zl += ad * d.dzl;
  t.zu += ad * d.dzu;
  t.vl += ad * d.dvl;
  t.vu += ad * d.dvu;
  return t;
}

void InteriorPoint::safeguard_duals(Iterate& it, double mu) const {
  for (int k = 0; k < nf_; ++k) {
    const double x = it.x[free_[k]];
    if (has_xl_[k]) {
      const double gap = x - xl_[k];
      it.zl[k] = std::clamp(it.zl[k], mu / (kKappaSigma * gap), kKappaSigma * mu / gap);
    }
    if (has_xu_[k]) {
      const double gap = xu_[k] - x;
      it.zu[k] = std::clamp(it.zu[k], mu / (kKappaSigma * gap), kKappaSigma * mu / gap);
    }
  }
  for (int j = 0; j < ns_; ++j) {
    if (has_sl_[j]) {
      const double gap = it.s[j] - sl_[j];
      it.vl[j] = std::clamp(it.vl[j], mu / (kKappaSigma * gap), kKappaSigma * mu / gap);
    }
    if (has_su_[j]) {
      const double gap = su_[j] - it.s[j];
      it.vu[j] = std::clamp(it.vu[j], mu / (kKappaSigma * gap), kKappaSigma * mu / gap);
    }
  }
}

void InteriorPoint::least_squares_multipliers(Iterate& it) {
  if (m_ == 0) return;
  fill_kkt(it, 0.0, 1e-8, true);
  if (!analyzed_) {
    ldlt_.analyzePattern(kkt_);
    analyzed_ = true;
  }
  ldlt_.factorize(kkt_);
  if (ldlt_.info() != Eigen::Success) return;
  Vector rhs = Vector::Zero(nf_ + m_);
  for (int k = 0; k < nf_; ++k) rhs[k] = -(obj_scale_ * grad_[free_[k]] - it.zl[k] + it.zu[k]);
  for (int j = 0; j < ns_; ++j) rhs[nf_ + slack_row_[j]] = it.vl[j] - it.vu[j];
  const Vector sol = solve_kkt(rhs);
  const Vector lam = sol.tail(m_);
  if (lam.allFinite() && lam.lpNorm<Eigen::Infinity>() <= 1e3) it.lam = lam;
}

NlpSolution InteriorPoint::make_solution(const Iterate& it, SolveStatus status, const std::string& msg,
                                         int iters) const {
  NlpSolution sol;
  sol.z = it.x;
  sol.lambda = Vector::Zero(m_);
  for (int i = 0; i < m_; ++i) sol.lambda[i] = it.lam[i] * row_scale_[i] / obj_scale_;
  sol.z_lower = Vector::Zero(n_);
  sol.z_upper = Vector::Zero(n_);
  for (int k = 0; k < nf_; ++k) {
    if (has_xl_[k]) sol.z_lower[free_[k]] = it.zl[k] / obj_scale_;
    if (has_xu_[k]) sol.z_upper[free_[k]] = it.zu[k] / obj_scale_;
  }
  // Fixed variables absorb the remaining stationarity residual.
  if (nf_ < n_) {
    Vector r;
    p_.objective_gradient(it.x, r);
    if (m_ > 0) {
      SparseMatrix jac = p_.jacobian_structure();
      p_.jacobian(it.x, jac);
      r += jac.transpose() * sol.lambda;
    }
    for (int i = 0; i < n_; ++i) {
      if (pos_[i] >= 0) continue;
      if (r[i] > 0.0) sol.z_lower[i] = r[i];
      else sol.z_upper[i] = -r[i];
    }
  }
  sol.status = status;
  sol.message = msg;
  sol.iterations = iters;
  sol.objective = p_.objective(it.x);
  sol.kkt_residual = kkt_residual(p_, sol.z, sol.lambda, sol.z_lower, sol.z_upper);
  sol.constraint_violation = constraint_violation(p_, sol.z);
  return sol;
}

NlpSolution InteriorPoint::run() {
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  if (!p_.has_hessian()) throw Error(ErrorCode::invalid_argument, "interior point backend needs a Hessian");
  setup();

  Iterate it;
  it.x = default_start(p_, o_);
  {
    Vector xf(nf_);
    for (int k = 0; k < nf_; ++k) xf[k] = it.x[free_[k]];
    xf = push_inside(xf, xl_, xu_, o_.bound_push);
    for (int k = 0; k < nf_; ++k) it.x[free_[k]] = xf[k];
  }

  // Gradient-based scaling at the start point.
  Vector g0;
  p_.objective_gradient(it.x, grad_);
  if (!grad_.allFinite()) {
    return make_solution(it, SolveStatus::numerical_error, "non-finite gradient at the start point", 0);
  }
  obj_scale_ = std::min(1.0, kScaleTarget / std::max(1e-300, grad_.lpNorm<Eigen::Infinity>()));
  obj_scale_ = std::max(obj_scale_, 1e-8);
  row_scale_ = Vector::Ones(m_);
  if (m_ > 0) {
    p_.constraints(it.x, g0);
    p_.jacobian(it.x, jac_);
    Vector rowmax = Vector::Zero(m_);
    for (int col = 0; col < jac_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(jac_, col); e; ++e)
        rowmax[e.row()] = std::max(rowmax[e.row()], std::abs(e.value()));
    for (int i = 0; i < m_; ++i) row_scale_[i] = std::clamp(kScaleTarget / std::max(rowmax[i], 1e-300), 1e-8, 1.0);
    if (!g0.allFinite()) {
      return make_solution(it, SolveStatus::numerical_error, "non-finite constraints at the start point", 0);
    }
  }
  const Vector& gl = p_.constraint_lower();
  const Vector& gu = p_.constraint_upper();
  eq_rhs_ = Vector::Zero(m_);
  sl_.resize(ns_);
  su_.resize(ns_);
  has_sl_.resize(static_cast<std::size_t>(ns_));
  has_su_.resize(static_cast<std::size_t>(ns_));
  for (int i = 0; i < m_; ++i)
    if (row_slack_[i] < 0) eq_rhs_[i] = row_scale_[i] * gl[i];
  for (int j = 0; j < ns_; ++j) {
    const int i = slack_row_[j];
    sl_[j] = row_scale_[i] * gl[i];
    su_[j] = row_scale_[i] * gu[i];
    has_sl_[j] = std::isfinite(sl_[j]);
    has_su_[j] = std::isfinite(su_[j]);
  }
  it.s.resize(ns_);
  for (int j = 0; j < ns_; ++j) it.s[j] = row_scale_[slack_row_[j]] * g0[slack_row_[j]];
  it.s = push_inside(it.s, sl_, su_, o_.bound_push);
  it.zl = Vector::Zero(nf_);
  it.zu = Vector::Zero(nf_);
  for (int k = 0; k < nf_; ++k) {
    if (has_xl_[k]) it.zl[k] = 1.0;
    if (has_xu_[k]) it.zu[k] = 1.0;
  }
  it.vl = Vector::Zero(ns_);
  it.vu = Vector::Zero(ns_);
  for (int j = 0; j < ns_; ++j) {
    if (has_sl_[j]) it.vl[j] = 1.0;
    if (has_su_[j]) it.vu[j] = 1.0;
  }
  it.lam = Vector::Zero(m_);
  build_kkt_pattern();
  double mu = o_.mu_init;
  if (o_.warmstart_lambda && o_.warmstart_lambda->size() == m_) {
    for (int i = 0; i < m_; ++i) it.lam[i] = (*o_.warmstart_lambda)[i] * obj_scale_ / row_scale_[i];
    for (int j = 0; j < ns_; ++j) {
      const double l = it.lam[slack_row_[j]];
      if (has_sl_[j]) it.vl[j] = std::max(-l, mu / (it.s[j] - sl_[j]));
      if (has_su_[j]) it.vu[j] = std::max(l, mu / (su_[j] - it.s[j]));
    }
    const bool have_bounds = o_.warmstart_z_lower && o_.warmstart_z_upper && o_.warmstart_z_lower->size() == n_ &&
                             o_.warmstart_z_upper->size() == n_;
    if (have_bounds) {
      for (int k = 0; k < nf_; ++k) {
        const double x = it.x[free_[k]];
        if (has_xl_[k]) it.zl[k] = std::max((*o_.warmstart_z_lower)[free_[k]] * obj_scale_, mu / (x - xl_[k]));
        if (has_xu_[k]) it.zu[k] = std::max((*o_.warmstart_z_upper)[free_[k]] * obj_scale_, mu / (xu_[k] - x));
      }
    }
    safeguard_duals(it, mu);
  } else {
    least_squares_multipliers(it);
  }

  double tau = std::max(kTauMin, 1.0 - mu);
  const double scale_min = std::min(obj_scale_, m_ > 0 ? row_scale_.minCoeff() : 1.0);
  const double tol_internal = 0.5 * o_.tol * scale_min;
  double mu_min = std::min(1e-9, tol_internal / (kKappaEps + 1.0));

  double f = 0.0;
  Vector c;
  if (!eval_values(it.x, it.s, f, c) || !eval_derivatives(it))
    return make_solution(it, SolveStatus::numerical_error, "non-finite evaluation at the start point", 0);

  auto barrier_value = [&](const Iterate& t, double fv) {
    double b = obj_scale_ * fv;
    for (int k = 0; k < nf_; ++k) {
      const double x = t.x[free_[k]];
      if (has_xl_[k]) b -= mu * std::log(x - xl_[k]);
      if (has_xu_[k]) b -= mu * std::log(xu_[k] - x);
    }
    for (int j = 0; j < ns_; ++j) {
      if (has_sl_[j]) b -= mu * std::log(t.s[j] - sl_[j]);
      if (has_su_[j]) b -= mu * std::log(su_[j] - t.s[j]);
    }
    return b;
  };

  const double theta0 = theta(c);
  const double theta_max = 1e4 * std::max(1.0, theta0);
  const double theta_min = 1e-4 * std::max(1.0, theta0);
  std::vector<std::pair<double, double>> filter;
  double delta_w = 0.0, delta_c = 0.0;
  int fallbacks = 0;

  for (int iter = 0; iter <= o_.max_iterations; ++iter) {
    // Barrier parameter update.
    double err0 = optimality_error(it, 0.0);
    if (err0 <= tol_internal) {
      NlpSolution sol = make_solution(it, SolveStatus::optimal, "converged", iter);
      if (sol.kkt_residual <= o_.tol && sol.constraint_violation <= o_.tol) {
        sol.wall_time = elapsed();
        return sol;
      }
      mu_min = std::max(1e-14, 0.1 * mu_min);
    }
    while (mu > mu_min && optimality_error(it, mu) <= kKappaEps * mu) {
      mu = std::max(mu_min, std::min(kKappaMu * mu, std::pow(mu, kThetaMu)));
      tau = std::max(kTauMin, 1.0 - mu);
      filter.clear();
    }
    if (iter == o_.max_iterations) {
      NlpSolution sol = make_solution(it, SolveStatus::max_iter, "iteration limit reached", iter);
      sol.wall_time = elapsed();
      return sol;
    }
    if (elapsed() > o_.max_wall_time) {
      NlpSolution sol = make_solution(it, SolveStatus::max_iter, "wall-clock limit reached", iter);
      sol.wall_time = elapsed();
      return sol;
    }

    // Newton step.
    if (!factorize_with_inertia(it, delta_w, delta_c)) {
      NlpSolution sol = make_solution(it, SolveStatus::numerical_error, "KKT factorization failed", iter);
      sol.wall_time = elapsed();
      return sol;
    }
    Vector rx, rs;
    residual_vectors(it, rx, rs);
    for (int k = 0; k < nf_; ++k) {
      const double x = it.x[free_[k]];
      if (has_xl_[k]) rx[k] -= mu / (x - xl_[k]);
      if (has_xu_[k]) rx[k] += mu / (xu_[k] - x);
    }
    for (int j = 0; j < ns_; ++j) {
      if (has_sl_[j]) rs[j] -= mu / (it.s[j] - sl_[j]);
      if (has_su_[j]) rs[j] += mu / (su_[j] - it.s[j]);
    }
    Step d;
    compute_step(it, rx, rs, c, delta_w, d);
    complete_step(it, mu, delta_w, d);
    if (!d.dx.allFinite() || !d.dlam.allFinite()) {
      NlpSolution sol = make_solution(it, SolveStatus::numerical_error, "non-finite Newton step", iter);
      sol.wall_time = elapsed();
      return sol;
    }

    // Filter line search.
    const double th = theta(c);
    const double phi = barrier_value(it, f);
    const double dphi = rx.dot(d.dx) + rs.dot(d.ds);
    const double alpha_max = primal_fraction(it, d, tau);
    const double alpha_z = dual_fraction(it, d, tau);
    double alpha_min = kGammaTheta;
    if (dphi < 0.0) {
      alpha_min = std::min(kGammaTheta, kGammaPhi * th / -dphi);
      if (th <= theta_min) alpha_min = std::min(alpha_min, kDelta * std::pow(th, kSTheta) / std::pow(-dphi, kSPhi));
    }
    alpha_min = std::max(kGammaAlpha * alpha_min, 1e-10 * alpha_max);

    // Tiny steps: take them and let mu move.
    double step_rel = 0.0;
    for (int k = 0; k < nf_; ++k)
      step_rel = std::max(step_rel, std::abs(d.dx[k]) / (1.0 + std::abs(it.x[free_[k]])));
    const bool tiny = step_rel < 1e-14 && th < tol_internal;

    auto acceptable_to_filter = [&](double th_t, double phi_t) {
      if (th_t > theta_max) return false;
      for (const auto& [fth, fphi] : filter)
        if (th_t >= fth && phi_t >= fphi) return false;
      return true;
    };

    double alpha = alpha_max;
    bool accepted = false;
    bool f_type = false;
    Iterate next;
    double f_next = 0.0;
    Vector c_next;
    int ls = 0;
    double best_theta = std::numeric_limits<double>::infinity();
    Iterate best;
    double best_f = 0.0;
    Vector best_c;

    if (tiny) {
      next = trial(it, d, alpha_max, alpha_z);
      accepted = eval_values(next.x, next.s, f_next, c_next);
    }
    while (!accepted && alpha >= alpha_min) {
      Iterate t = trial(it, d, alpha, alpha_z);
      double ft;
      Vector ct;
      const bool ok = eval_values(t.x, t.s, ft, ct);
      ++ls;
      if (ok) {
        const double th_t = theta(ct);
        const double phi_t = barrier_value(t, ft);
        if (th_t < best_theta) {
          best_theta = th_t;
          best = t;
          best_f = ft;
          best_c = ct;
        }
        if (acceptable_to_filter(th_t, phi_t)) {
          const bool switching = dphi < 0.0 && alpha * std::pow(-dphi, kSPhi) > kDelta * std::pow(th, kSTheta);
          if (th <= theta_min && switching) {
            if (phi_t <= phi + kEta * alpha * dphi) {
              accepted = true;
              f_type = true;
            }
          } else if (th_t <= (1.0 - kGammaTheta) * th || phi_t <= phi - kGammaPhi * th) {
            accepted = true;
          }
        }
        if (accepted) {
          next = std::move(t);
          f_next = ft;
          c_next = std::move(ct);
          break;
        }
        // Second-order correction on the first trial.
        if (alpha == alpha_max && th_t >= th) {
          Vector c_soc = alpha * c + ct;
          double th_old = th;
          double th_soc = th_t;
          for (int p = 0; p < 4 && !accepted; ++p) {
            Step ds;
            compute_step(it, rx, rs, c_soc, delta_w, ds);
            complete_step(it, mu, delta_w, ds);
            const double a_soc = primal_fraction(it, ds, tau);
            Iterate ts = trial(it, ds, a_soc, alpha_z);
            double fs;
            Vector cs;
            if (!eval_values(ts.x, ts.s, fs, cs)) break;
            const double th_s = theta(cs);
            const double phi_s = barrier_value(ts, fs);
            if (acceptable_to_filter(th_s, phi_s)) {
              const bool switching =
                  dphi < 0.0 && alpha * std::pow(-dphi, kSPhi) > kDelta * std::pow(th, kSTheta);
              if (th <= theta_min && switching) {
                if (phi_s <= phi + kEta * alpha * dphi) accepted = f_type = true;
              } else if (th_s <= (1.0 - kGammaTheta) * th || phi_s <= phi - kGammaPhi * th) {
                accepted = true;
              }
            }
            if (accepted) {
              next = std::move(ts);
              f_next = fs;
              c_next = std::move(cs);
              break;
            }
            if (th_s > kKappaSoc * th_old) break;
            th_old = th_soc;
            th_soc = th_s;
            c_soc = a_soc * c_soc + cs;
          }
          if (accepted) break;
        }
      }
      alpha *= 0.5;
    }

    bool restored = false;
    if (!accepted && allow_restoration_ && m_ > 0 && th > tol_internal) {
      filter.emplace_back(th, phi);
      const Vector& gl = p_.constraint_lower();
      const Vector& gu = p_.constraint_upper();
      // Iterate for the original problem at x with slacks projected onto their bounds.
      auto project = [&](const Vector& x, Iterate& out, double& fo, Vector& co) {
        Vector g;
        p_.constraints(x, g);
        out.x = x;
        out.s.resize(ns_);
        for (int j = 0; j < ns_; ++j) {
          const int i = slack_row_[j];
          const double lo = has_sl_[j] ? sl_[j] : -kInf, hi = has_su_[j] ? su_[j] : kInf;
          out.s[j] = std::clamp(row_scale_[i] * g[i], lo, hi);
        }
        out.s = push_inside(out.s, sl_, su_, 1e-8);
        return eval_values(out.x, out.s, fo, co);
      };
      auto stop = [&](const Vector& zr) {
        Iterate t;
        double ft;
        Vector ct;
        if (!project(zr.head(n_), t, ft, ct)) return false;
        const double th_t = theta(ct);
        return th_t <= 0.9 * th && acceptable_to_filter(th_t, barrier_value(t, ft));
      };
      Vector g;
      p_.constraints(it.x, g);
      const double rho = 1000.0;
      const double mu_r = std::max(mu, c.lpNorm<Eigen::Infinity>());
      Vector zr(n_ + 2 * m_);
      zr.head(n_) = it.x;
      for (int i = 0; i < m_; ++i) {
        const double gs = row_scale_[i] * g[i];
        const double lo = std::isfinite(gl[i]) ? row_scale_[i] * gl[i] : -kInf;
        const double hi = std::isfinite(gu[i]) ? row_scale_[i] * gu[i] : kInf;
        const double ci = gs - std::clamp(gs, lo, hi);
        const double a = (mu_r - rho * ci) / (2.0 * rho);
        const double nv = a + std::sqrt(a * a + mu_r * ci / (2.0 * rho));
        zr[n_ + m_ + i] = nv;
        zr[n_ + i] = ci + nv;
      }
      RestorationProblem rp(p_, row_scale_, it.x, rho, std::sqrt(mu));
      SolverOptions ro;
      ro.tol = o_.tol;
      ro.mu_init = mu_r;
      ro.max_iterations = 500;
      ro.bound_push = 1e-8;
      ro.max_wall_time = std::max(0.0, o_.max_wall_time - elapsed());
      ro.warmstart = zr;
      if (o_.log) ro.log = [&](const std::string& line) { o_.log("  resto " + line); };
      InteriorPoint inner(rp, ro, false, stop);
      const NlpSolution rs = inner.run();
      if (inner.stopped_) {
        Vector cr;
        project(rs.z.head(n_), next, f_next, cr);
        c_next = std::move(cr);
        next.lam = Vector::Zero(m_);
        next.zl = next.zu = Vector::Zero(nf_);
        for (int k = 0; k < nf_; ++k) {
          const double x = next.x[free_[k]];
          if (has_xl_[k]) next.zl[k] = std::min(1e3, mu / (x - xl_[k]));
          if (has_xu_[k]) next.zu[k] = std::min(1e3, mu / (xu_[k] - x));
        }
        next.vl = next.vu = Vector::Zero(ns_);
        for (int j = 0; j < ns_; ++j) {
          if (has_sl_[j]) next.vl[j] = std::min(1e3, mu / (next.s[j] - sl_[j]));
          if (has_su_[j]) next.vu[j] = std::min(1e3, mu / (su_[j] - next.s[j]));
        }
        accepted = restored = true;
      } else if (rs.status == SolveStatus::optimal) {
        NlpSolution sol =
            make_solution(it, SolveStatus::infeasible, "restoration converged to a locally infeasible point", iter);
        sol.wall_time = elapsed();
        return sol;
      }
    }

    if (!accepted) {
      // Last resort when restoration is unavailable or stalls: take the trial
      // with the smallest infeasibility if it improves, otherwise a short step.
      ++fallbacks;
      if (fallbacks > 25) {
        NlpSolution sol = make_solution(it, SolveStatus::infeasible, "line search failed repeatedly", iter);
        sol.wall_time = elapsed();
        return sol;
      }
      filter.clear();
      if (best_theta < th && best.x.size() == n_) {
        next = std::move(best);
        f_next = best_f;
        c_next = std::move(best_c);
      } else {
        next = trial(it, d, std::max(alpha_min, 1e-3 * alpha_max), alpha_z);
        if (!eval_values(next.x, next.s, f_next, c_next)) {
          NlpSolution sol = make_solution(it, SolveStatus::numerical_error, "non-finite trial point", iter);
          sol.wall_time = elapsed();
          return sol;
        }
      }
    } else if (!restored) {
      fallbacks = std::max(0, fallbacks - 1);
      if (!f_type) filter.emplace_back((1.0 - kGammaTheta) * th, phi - kGammaPhi * th);
    }

    safeguard_duals(next, mu);
    it = std::move(next);
    f = f_next;
    c = std::move(c_next);
    if (!eval_derivatives(it)) {
      NlpSolution sol = make_solution(it, SolveStatus::numerical_error, "non-finite derivatives", iter);
      sol.wall_time = elapsed();
      return sol;
    }
    if (restored) {
      least_squares_multipliers(it);
      eval_derivatives(it);
    }
    if (stop_ && stop_(it.x)) {
      stopped_ = true;
      NlpSolution sol = make_solution(it, SolveStatus::optimal, "stop test satisfied", iter);
      sol.wall_time = elapsed();
      return sol;
    }
    if (o_.log) {
      char buf[200];
      std::snprintf(buf, sizeof(buf), "ip %4d obj %.10e inf_pr %.3e inf_du %.3e lg(mu) %5.1f alpha %.3e dw %.1e ls %d",
                    iter, f, theta(c), err0, std::log10(mu), alpha, delta_w, ls);
      o_.log(buf);
    }
  }
  NlpSolution sol = make_solution(it, SolveStatus::max_iter, "iteration limit reached", o_.max_iterations);
  sol.wall_time = elapsed();
  return sol;
}

}  // namespace

NlpSolution solve_interior_point(const NlpProblem& p, const SolverOptions& opts) {
  InteriorPoint ip(p, opts);
  return ip.run();
}

}  // namespace raceopt::nlp
