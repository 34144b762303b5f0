#include "raceopt/transcription/collocation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "raceopt/common/error.hpp"

namespace raceopt::transcription {
namespace {

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double radau_poly(int d, double x) { return legendre(d, 2.0 * x - 1.0) - legendre(d - 1, 2.0 * x - 1.0); }

std::vector<double> with_zero(const std::vector<double>& tau) {
  std::vector<double> nodes;
  nodes.reserve(tau.size() + 1);
  nodes.push_back(0.0);
  nodes.insert(nodes.end(), tau.begin(), tau.end());
  return nodes;
}

void check_distinct(const std::vector<double>& nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (std::abs(nodes[i] - nodes[j]) < 1e-12)
        throw Error(ErrorCode::duplicate_nodes, "collocation nodes must be distinct");
}

}  // namespace

std::vector<double> radau_points(int d) {
  if (d < 1 || d > 4) throw Error(ErrorCode::unsupported_degree, "Radau degree must be in 1..4, got " + std::to_string(d));
  std::vector<double> roots;
  // x = 1 is always a root; the other d-1 lie in (0, 1) and are simple.
  const int grid = 4000;
  double xa = 0.0, fa = radau_poly(d, xa);
  for (int i = 1; i < grid && static_cast<int>(roots.size()) < d - 1; ++i) {
    const double xb = static_cast<double>(i) / grid;
    const double fb = radau_poly(d, xb);
    if (fa == 0.0) {
      roots.push_back(xa);
    } else if (fa * fb < 0.0) {
      double lo = xa, hi = xb, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = radau_poly(d, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xa = xb;
    fa = fb;
  }
  roots.push_back(1.0);
  if (static_cast<int>(roots.size()) != d) throw Error(ErrorCode::unsupported_degree, "Radau root search failed");
  return roots;
}

Eigen::VectorXd lagrange_basis(const std::vector<double>& tau, double theta) {
  const auto nodes = with_zero(tau);
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd l(n);
  for (int j = 0; j < n; ++j) {
    double v = 1.0;
    for (int i = 0; i < n; ++i)
      if (i != j) v *= (theta - nodes[i]) / (nodes[j] - nodes[i]);
    l[j] = v;
  }
  return l;
}

Eigen::VectorXd lagrange_basis_derivative(const std::vector<double>& tau, double theta) {
  const auto nodes = with_zero(tau);
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd dl = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      double v = 1.0 / (nodes[j] - nodes[m]);
      for (int i = 0; i < n; ++i)
        if (i != j && i != m) v *= (theta - nodes[i]) / (nodes[j] - nodes[i]);
      dl[j] += v;
    }
  }
  return dl;
}

Eigen::MatrixXd differentiation_matrix(const std::vector<double>& tau) {
  const auto nodes = with_zero(tau);
  check_distinct(nodes);
  const int d = static_cast<int>(tau.size());
  Eigen::MatrixXd D(d + 1, d);
  for (int k = 0; k < d; ++k) D.col(k) = lagrange_basis_derivative(tau, tau[k]);
  return D;
}

Eigen::VectorXd quadrature_weights(const std::vector<double>& tau) {
  check_distinct(tau);
  const int d = static_cast<int>(tau.size());
  Eigen::MatrixXd v(d, d);
  Eigen::VectorXd rhs(d);
  for (int p = 0; p < d; ++p) {
    for (int k = 0; k < d; ++k) v(p, k) = std::pow(tau[k], p);
    rhs[p] = 1.0 / (p + 1.0);
  }
  return v.colPivHouseholderQr().solve(rhs);
}

CollocationScheme make_scheme(int d) {
  CollocationScheme s;
  s.degree = d;
  s.points = radau_points(d);
  s.D = differentiation_matrix(s.points);
  s.weights = quadrature_weights(s.points);
  return s;
}

}  // namespace raceopt::transcription
