#pragma once

#include <Eigen/Core>
#include <vector>

namespace raceopt::transcription {

/// Radau IIA nodes on (0, 1]: roots of P_d(2x-1) - P_{d-1}(2x-1), last node 1.
/// Supported d: 1 (returns {1}) to 4.
std::vector<double> radau_points(int d);

/// (d+1) x d matrix with D(j, k) = L_j'(tau_k), L_j the Lagrange basis on
/// {0, tau_1, ..., tau_d}.
Eigen::MatrixXd differentiation_matrix(const std::vector<double>& tau);

/// Weights w_k = integral over [0, 1] of the Lagrange basis on tau alone.
Eigen::VectorXd quadrature_weights(const std::vector<double>& tau);

/// Lagrange basis values on {0, tau...} at theta.
Eigen::VectorXd lagrange_basis(const std::vector<double>& tau, double theta);

/// Lagrange basis derivatives on {0, tau...} at theta.
Eigen::VectorXd lagrange_basis_derivative(const std::vector<double>& tau, double theta);

struct CollocationScheme {
  int degree = 3;
  std::vector<double> points;
  Eigen::MatrixXd D;
  Eigen::VectorXd weights;
};

CollocationScheme make_scheme(int d);

}  // namespace raceopt::transcription
