#include "raceopt/transcription/trajectory.hpp"

#include <algorithm>

#include "raceopt/common/error.hpp"
#include "raceopt/transcription/collocation.hpp"

namespace raceopt::transcription {

namespace {
void check_interval(const Trajectory& t, int k) {
  if (k < 0 || k >= t.intervals()) throw Error(ErrorCode::out_of_domain, "interval index out of range");
}
}  // namespace

Eigen::VectorXd Trajectory::interp_state(int k, double theta) const {
  check_interval(*this, k);
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::out_of_domain, "theta must lie in [0, 1]");
  const Eigen::VectorXd l = lagrange_basis(tau, theta);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nx);
  for (int j = 0; j <= degree(); ++j) r += l[j] * x[k][j];
  // Exact reproduction at the nodes.
  if (theta == 0.0) return x[k][0];
  for (int j = 0; j < degree(); ++j)
    if (theta == tau[j]) return x[k][j + 1];
  return r;
}

Eigen::VectorXd Trajectory::interp_state_derivative(int k, double theta) const {
  check_interval(*this, k);
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::out_of_domain, "theta must lie in [0, 1]");
  const Eigen::VectorXd dl = lagrange_basis_derivative(tau, theta);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nx);
  for (int j = 0; j <= degree(); ++j) r += dl[j] * x[k][j];
  return r;
}

Eigen::VectorXd Trajectory::interp_input(int k, double theta) const {
  check_interval(*this, k);
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::out_of_domain, "theta must lie in [0, 1]");
  const int d = degree();
  if (theta <= tau[0]) {
    const Eigen::VectorXd left = k > 0 ? u[k - 1][d - 1] : u[k][0];
    const double w = theta / tau[0];
    return (1.0 - w) * left + w * u[k][0];
  }
  for (int j = 1; j < d; ++j) {
    if (theta <= tau[j]) {
      const double w = (theta - tau[j - 1]) / (tau[j] - tau[j - 1]);
      return (1.0 - w) * u[k][j - 1] + w * u[k][j];
    }
  }
  return u[k][d - 1];
}

double Trajectory::time_at(int k, int j) const {
  if (time_index < 0) throw Error(ErrorCode::invalid_argument, "trajectory has no time state");
  if (k == intervals() && j == 0) return final_state[time_index];
  check_interval(*this, k);
  if (j < 0 || j > degree()) throw Error(ErrorCode::out_of_domain, "node index out of range");
  return x[k][j][time_index];
}

double Trajectory::final_time() const {
  if (time_index < 0) throw Error(ErrorCode::invalid_argument, "trajectory has no time state");
  return final_state[time_index];
}

std::pair<int, double> Trajectory::locate(double s) const {
  if (s < boundaries.front() || s > boundaries.back()) throw Error(ErrorCode::out_of_domain, "s outside trajectory");
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), s);
  int k = static_cast<int>(it - boundaries.begin()) - 1;
  k = std::clamp(k, 0, intervals() - 1);
  const double theta = (s - boundaries[k]) / (boundaries[k + 1] - boundaries[k]);
  return {k, std::clamp(theta, 0.0, 1.0)};
}

std::vector<Trajectory::Node> Trajectory::nodes() const {
  std::vector<Node> r;
  r.push_back({0, 0});
  for (int k = 0; k < intervals(); ++k)
    for (int j = 1; j <= degree(); ++j) r.push_back({k, j});
  return r;
}

Eigen::VectorXd Trajectory::node_state(const Node& n) const {
  if (n.k == intervals()) return final_state;
  return x[n.k][n.j];
}

}  // namespace raceopt::transcription
