#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace raceopt::transcription {

/// Collocation solution in physical units. Interval k spans
/// [boundaries[k], boundaries[k+1]]; x[k][0] is its start state and x[k][j]
/// (j = 1..d) the state at tau_j. u[k][j-1] is the input at tau_j.
struct Trajectory {
  std::string model;
  int nx = 0;
  int nu = 0;
  int s_index = 0;
  int y_index = 1;
  int time_index = -1;
  std::vector<double> tau;
  std::vector<double> boundaries;
  std::vector<std::vector<Eigen::VectorXd>> x;
  std::vector<std::vector<Eigen::VectorXd>> u;
  Eigen::VectorXd final_state;

  int intervals() const { return static_cast<int>(x.size()); }
  int degree() const { return static_cast<int>(tau.size()); }

  /// Lagrange interpolation through the d+1 nodes of interval k.
  Eigen::VectorXd interp_state(int k, double theta) const;
  /// d/dtheta of the interval polynomial.
  Eigen::VectorXd interp_state_derivative(int k, double theta) const;
  /// Piecewise-linear input between nodes; before tau_1 the previous
  /// interval's last input (or tau_1's own for k = 0) is the left anchor.
  Eigen::VectorXd interp_input(int k, double theta) const;

  /// t-component of node j (0 = interval start) in interval k.
  double time_at(int k, int j) const;
  double start_time() const { return time_at(0, 0); }
  double final_time() const;

  /// Interval containing s and the local parameter within it.
  std::pair<int, double> locate(double s) const;

  /// The initial state (0, 0) followed by every collocation node (k, 1..d).
  /// The last node coincides with the final boundary state.
  struct Node {
    int k;
    int j;
  };
  std::vector<Node> nodes() const;
  Eigen::VectorXd node_state(const Node& n) const;
};

}  // namespace raceopt::transcription
