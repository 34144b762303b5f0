#include "raceopt/transcription/transcribe.hpp"

#include <algorithm>
#include <cmath>

namespace raceopt::transcription {

void set_initial_guess(Transcription& tr, const std::function<void(double, int, double*, double*)>& guess) {
  const Layout& L = tr.layout;
  std::vector<double> x(static_cast<std::size_t>(L.nx)), u(static_cast<std::size_t>(std::max(1, L.nu)));
  auto put_x = [&](int var, int i, double v) {
    const double lo = tr.nlp.variable_lower()[var], hi = tr.nlp.variable_upper()[var];
    tr.nlp.set_initial(var, std::clamp((v - L.x_offset[i]) / L.x_scale[i], lo, hi));
  };
  for (int k = 0; k <= L.K; ++k) {
    const int kk = std::min(k, L.K - 1);
    guess(L.boundaries[k], kk, x.data(), u.data());
    for (int i = 0; i < L.nx; ++i) put_x(L.boundary(k, i), i, x[i]);
  }
  for (int k = 0; k < L.K; ++k)
    for (int j = 1; j <= L.d; ++j) {
      guess(L.sigma(k, j), k, x.data(), u.data());
      for (int i = 0; i < L.nx; ++i) put_x(L.colloc(k, j, i), i, x[i]);
      for (int i = 0; i < L.nu; ++i) {
        const int var = L.input(k, j, i);
        const double lo = tr.nlp.variable_lower()[var], hi = tr.nlp.variable_upper()[var];
        tr.nlp.set_initial(var, std::clamp(u[i] / L.u_scale[i], lo, hi));
      }
    }
}

void set_initial_from(Transcription& tr, const Trajectory& traj) {
  const double s0 = traj.boundaries.front(), s1 = traj.boundaries.back();
  set_initial_guess(tr, [&](double sigma, int, double* x, double* u) {
    const auto [k, theta] = traj.locate(std::clamp(sigma, s0, s1));
    const Eigen::VectorXd xs = traj.interp_state(k, theta);
    const Eigen::VectorXd us = traj.interp_input(k, theta);
    for (int i = 0; i < traj.nx; ++i) x[i] = xs[i];
    for (int i = 0; i < traj.nu; ++i) u[i] = us[i];
    // Outside the source range hold the end state but keep sigma consistent.
    if (sigma > s1 && traj.s_index >= 0) {
      const Eigen::VectorXd dx = traj.interp_state_derivative(k, theta) / (traj.boundaries[k + 1] - traj.boundaries[k]);
      for (int i = 0; i < traj.nx; ++i) x[i] += dx[i] * (sigma - s1);
    }
  });
}

nlp::Vector pack(const Layout& L, const Trajectory& traj) {
  if (traj.intervals() != L.K || traj.degree() != L.d || traj.nx != L.nx || traj.nu != L.nu)
    throw Error(ErrorCode::invalid_argument, "trajectory does not match the transcription layout");
  nlp::Vector z(L.num_variables());
  for (int k = 0; k < L.K; ++k)
    for (int i = 0; i < L.nx; ++i) z[L.boundary(k, i)] = (traj.x[k][0][i] - L.x_offset[i]) / L.x_scale[i];
  for (int i = 0; i < L.nx; ++i) z[L.boundary(L.K, i)] = (traj.final_state[i] - L.x_offset[i]) / L.x_scale[i];
  for (int k = 0; k < L.K; ++k)
    for (int j = 1; j <= L.d; ++j) {
      for (int i = 0; i < L.nx; ++i) z[L.colloc(k, j, i)] = (traj.x[k][j][i] - L.x_offset[i]) / L.x_scale[i];
      for (int i = 0; i < L.nu; ++i) z[L.input(k, j, i)] = traj.u[k][j - 1][i] / L.u_scale[i];
    }
  return z;
}

Trajectory extract(const Layout& L, const nlp::Vector& z, const std::string& model, int s_index, int y_index,
                   int time_index) {
  Trajectory t;
  t.model = model;
  t.nx = L.nx;
  t.nu = L.nu;
  t.s_index = s_index;
  t.y_index = y_index;
  t.time_index = time_index;
  t.tau = L.tau;
  t.boundaries = L.boundaries;
  auto state = [&](auto index_of) {
    Eigen::VectorXd x(L.nx);
    for (int i = 0; i < L.nx; ++i) x[i] = L.x_offset[i] + L.x_scale[i] * z[index_of(i)];
    return x;
  };
  t.x.resize(static_cast<std::size_t>(L.K));
  t.u.resize(static_cast<std::size_t>(L.K));
  for (int k = 0; k < L.K; ++k) {
    t.x[k].push_back(state([&](int i) { return L.boundary(k, i); }));
    for (int j = 1; j <= L.d; ++j) {
      t.x[k].push_back(state([&](int i) { return L.colloc(k, j, i); }));
      Eigen::VectorXd u(L.nu);
      for (int i = 0; i < L.nu; ++i) u[i] = L.u_scale[i] * z[L.input(k, j, i)];
      t.u[k].push_back(u);
    }
  }
  t.final_state = state([&](int i) { return L.boundary(L.K, i); });
  return t;
}

double max_defect(const Transcription& tr, const nlp::Vector& z) {
  nlp::Vector g;
  tr.nlp.constraints(z, g);
  const Layout& L = tr.layout;
  const int rows = L.K * L.d * L.nx + L.K * L.nx;
  return g.segment(L.defect_row, rows).lpNorm<Eigen::Infinity>();
}

}  // namespace raceopt::transcription
