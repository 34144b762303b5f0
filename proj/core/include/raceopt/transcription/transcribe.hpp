#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "raceopt/common/error.hpp"
#include "raceopt/nlp/structured.hpp"
#include "raceopt/transcription/collocation.hpp"
#include "raceopt/transcription/trajectory.hpp"

namespace raceopt::transcription {

/// A model usable by transcribe():
///   static constexpr int nx, nu, np;
///   template <class T> void spatial(int interval, const T* x, const T* u, T* f, T* path) const;
/// f is dx/dsigma in physical units for the independent variable sigma;
/// path holds np outputs bounded per node.
template <class M>
concept CollocationModel = requires(const M& m, const double* x, const double* u, double* f, double* p) {
  { M::nx } -> std::convertible_to<int>;
  { M::nu } -> std::convertible_to<int>;
  { M::np } -> std::convertible_to<int>;
  m.template spatial<double>(0, x, u, f, p);
};

/// Bounds, affine scaling (x = offset + scale * z, u = scale * z), boundary
/// conditions and objective weights, all in physical units.
struct OcpBounds {
  std::vector<double> x_lower, x_upper, x_scale, x_offset;
  std::vector<double> u_lower, u_upper, u_scale;
  std::vector<double> path_lower, path_upper;
  std::vector<double> initial_lower, initial_upper;  // state at sigma_start
  std::vector<double> final_lower, final_upper;      // empty = state bounds
  int objective_state = -1;  // final value minimized; -1 = none
  double w_u = 0.0;          // input magnitude weight (scaled inputs)
  double w_du = 0.0;         // input first-difference weight (scaled inputs)
};

struct Layout {
  int K = 0, d = 0, nx = 0, nu = 0, np = 0;
  std::vector<double> boundaries;
  std::vector<double> tau;
  std::vector<double> x_scale, x_offset, u_scale;
  int boundary_offset = 0, colloc_offset = 0, input_offset = 0;
  int defect_row = 0, continuity_row = 0, path_row = 0;

  int num_variables() const { return input_offset + K * d * nu; }
  int boundary(int k, int i) const { return boundary_offset + k * nx + i; }
  int colloc(int k, int j, int i) const { return colloc_offset + (k * d + (j - 1)) * nx + i; }
  int state(int k, int j, int i) const { return j == 0 ? boundary(k, i) : colloc(k, j, i); }
  int input(int k, int j, int i) const { return input_offset + (k * d + (j - 1)) * nu + i; }
  int defect(int k, int j, int i) const { return defect_row + (k * d + (j - 1)) * nx + i; }
  int path(int k, int j, int p) const { return path_row + (k * d + (j - 1)) * np + p; }
  double h(int k) const { return boundaries[k + 1] - boundaries[k]; }
  double sigma(int k, int j) const { return boundaries[k] + (j == 0 ? 0.0 : tau[j - 1]) * h(k); }
};

struct Transcription {
  nlp::StructuredNlp nlp;
  Layout layout;
};

namespace detail {

template <class M>
struct NodeFunction {
  std::shared_ptr<const M> model;
  int interval = 0;
  std::array<double, M::nx> xs{}, xo{};
  std::array<double, M::nu> us{};

  template <class T>
  void operator()(const T* in, T* out) const {
    std::array<T, M::nx> x;
    std::array<T, M::nu> u;
    std::array<T, M::nx> f;
    std::array<T, M::np> path;
    for (int i = 0; i < M::nx; ++i) x[i] = xo[i] + xs[i] * in[i];
    for (int i = 0; i < M::nu; ++i) u[i] = us[i] * in[M::nx + i];
    model->template spatial<T>(interval, x.data(), u.data(), f.data(), path.data());
    for (int i = 0; i < M::nx; ++i) out[i] = f[i] / xs[i];
    for (int p = 0; p < M::np; ++p) out[M::nx + p] = path[p];
  }
};

inline void require_size(const std::vector<double>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorCode::invalid_argument, std::string("OcpBounds.") + what + " has the wrong size");
}

}  // namespace detail

/// Spatial direct collocation over the given interval boundaries with Radau
/// degree d. Variables: boundary states (K+1)nx, collocation states K d nx,
/// inputs K d nu. Rows: defects K d nx, continuity K nx, path K d np. The
/// returned NLP is not finalized so callers can add rows.
template <CollocationModel M>
Transcription transcribe(std::shared_ptr<const M> model, const OcpBounds& b, const std::vector<double>& boundaries,
                         int degree) {
  constexpr int nx = M::nx, nu = M::nu, np = M::np;
  using detail::require_size;
  require_size(b.x_lower, nx, "x_lower");
  require_size(b.x_upper, nx, "x_upper");
  require_size(b.x_scale, nx, "x_scale");
  require_size(b.x_offset, nx, "x_offset");
  require_size(b.u_lower, nu, "u_lower");
  require_size(b.u_upper, nu, "u_upper");
  require_size(b.u_scale, nu, "u_scale");
  require_size(b.path_lower, np, "path_lower");
  require_size(b.path_upper, np, "path_upper");
  require_size(b.initial_lower, nx, "initial_lower");
  require_size(b.initial_upper, nx, "initial_upper");
  if (!b.final_lower.empty()) require_size(b.final_lower, nx, "final_lower");
  if (!b.final_upper.empty()) require_size(b.final_upper, nx, "final_upper");
  if (boundaries.size() < 3) throw Error(ErrorCode::invalid_argument, "transcription needs at least 2 intervals");

  Transcription tr;
  Layout& L = tr.layout;
  L.K = static_cast<int>(boundaries.size()) - 1;
  L.d = degree;
  L.nx = nx;
  L.nu = nu;
  L.np = np;
  L.boundaries = boundaries;
  const CollocationScheme scheme = make_scheme(degree);
  L.tau = scheme.points;
  L.x_scale = b.x_scale;
  L.x_offset = b.x_offset;
  L.u_scale = b.u_scale;
  for (int k = 0; k < L.K; ++k)
    if (!(L.h(k) > 0.0)) throw Error(ErrorCode::invalid_argument, "interval boundaries must increase");

  auto zx = [&](int i, double v) { return (v - b.x_offset[i]) / b.x_scale[i]; };
  auto zu = [&](int i, double v) { return v / b.u_scale[i]; };

  auto& nlp = tr.nlp;
  const int K = L.K, d = L.d;
  L.boundary_offset = 0;
  for (int k = 0; k <= K; ++k)
    for (int i = 0; i < nx; ++i) {
      double lo = b.x_lower[i], hi = b.x_upper[i];
      if (k == 0) {
        if (b.initial_lower[i] > hi || b.initial_upper[i] < lo)
          throw Error(ErrorCode::infeasible_bounds,
                      "initial state component " + std::to_string(i) + " lies outside the state bounds");
        lo = std::max(lo, b.initial_lower[i]);
        hi = std::min(hi, b.initial_upper[i]);
      }
      if (k == K) {
        if (!b.final_lower.empty()) lo = std::max(lo, b.final_lower[i]);
        if (!b.final_upper.empty()) hi = std::min(hi, b.final_upper[i]);
        if (lo > hi)
          throw Error(ErrorCode::infeasible_bounds,
                      "final state component " + std::to_string(i) + " has an empty feasible range");
      }
      nlp.add_variables(1, zx(i, lo), zx(i, hi), 0.0, k == 0 ? "x0" : "xb");
    }
  L.colloc_offset = nlp.num_variables();
  for (int k = 0; k < K; ++k)
    for (int j = 1; j <= d; ++j)
      for (int i = 0; i < nx; ++i) nlp.add_variables(1, zx(i, b.x_lower[i]), zx(i, b.x_upper[i]), 0.0, "xc");
  L.input_offset = nlp.num_variables();
  for (int k = 0; k < K; ++k)
    for (int j = 1; j <= d; ++j)
      for (int i = 0; i < nu; ++i) nlp.add_variables(1, zu(i, b.u_lower[i]), zu(i, b.u_upper[i]), 0.0, "u");

  L.defect_row = nlp.add_constraints(K * d * nx, 0.0, 0.0, "defect");
  L.continuity_row = nlp.add_constraints(K * nx, 0.0, 0.0, "continuity");
  L.path_row = nlp.num_constraints();
  for (int k = 0; k < K; ++k)
    for (int j = 1; j <= d; ++j)
      for (int p = 0; p < np; ++p) nlp.add_constraints(1, b.path_lower[p], b.path_upper[p], "path");

  for (int k = 0; k < K; ++k) {
    auto fn = detail::NodeFunction<M>{model, k, {}, {}, {}};
    for (int i = 0; i < nx; ++i) {
      fn.xs[i] = b.x_scale[i];
      fn.xo[i] = b.x_offset[i];
    }
    for (int i = 0; i < nu; ++i) fn.us[i] = b.u_scale[i];
    auto block_fn = nlp::make_block<nx + nu, nx + np>(fn);
    for (int m = 1; m <= d; ++m) {
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= d; ++j) {
          const double c = scheme.D(j, m - 1);
          if (c != 0.0) nlp.add_linear(L.defect(k, m, i), L.state(k, j, i), c);
        }
      std::vector<int> vars;
      for (int i = 0; i < nx; ++i) vars.push_back(L.colloc(k, m, i));
      for (int i = 0; i < nu; ++i) vars.push_back(L.input(k, m, i));
      const int blk = nlp.add_block(block_fn, vars);
      for (int i = 0; i < nx; ++i) nlp.map_output(blk, i, L.defect(k, m, i), -L.h(k));
      for (int p = 0; p < np; ++p) nlp.map_output(blk, nx + p, L.path(k, m, p), 1.0);
    }
    for (int i = 0; i < nx; ++i) {
      const int row = L.continuity_row + k * nx + i;
      nlp.add_linear(row, L.boundary(k + 1, i), 1.0);
      nlp.add_linear(row, L.colloc(k, d, i), -1.0);
    }
  }

  if (b.objective_state >= 0) nlp.add_objective_linear(L.boundary(K, b.objective_state), b.x_scale[b.objective_state]);
  if (b.w_u > 0.0)
    for (int k = 0; k < K; ++k)
      for (int j = 1; j <= d; ++j)
        for (int i = 0; i < nu; ++i) {
          const int v = L.input(k, j, i);
          nlp.add_objective_quadratic(v, v, b.w_u * L.h(k) * scheme.weights[j - 1]);
        }
  if (b.w_du > 0.0) {
    int prev_k = 0, prev_j = 1;
    for (int k = 0; k < K; ++k)
      for (int j = 1; j <= d; ++j) {
        if (k == 0 && j == 1) continue;
        for (int i = 0; i < nu; ++i) {
          const int a = L.input(prev_k, prev_j, i), c = L.input(k, j, i);
          nlp.add_objective_quadratic(a, a, b.w_du);
          nlp.add_objective_quadratic(c, c, b.w_du);
          nlp.add_objective_quadratic(a, c, -2.0 * b.w_du);
        }
        prev_k = k;
        prev_j = j;
      }
  }
  return tr;
}

/// Sets the NLP initial point from a physical guess evaluated at every node.
/// guess(sigma, k, x, u) fills nx states and nu inputs.
void set_initial_guess(Transcription& tr, const std::function<void(double, int, double*, double*)>& guess);

/// Sets the initial point by sampling an existing trajectory at node sigma.
void set_initial_from(Transcription& tr, const Trajectory& traj);

/// Scaled NLP vector from a trajectory on the same layout.
nlp::Vector pack(const Layout& L, const Trajectory& traj);

/// Physical trajectory from a scaled NLP vector.
Trajectory extract(const Layout& L, const nlp::Vector& z, const std::string& model, int s_index, int y_index,
                   int time_index);

/// Largest defect or continuity residual (scaled units) at z.
double max_defect(const Transcription& tr, const nlp::Vector& z);

}  // namespace raceopt::transcription
