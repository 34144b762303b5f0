#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "../support/linear_ode.hpp"
#include "../support/problems.hpp"
#include "raceopt/common/error.hpp"
#include "raceopt/nlp/solver.hpp"
#include "raceopt/transcription/collocation.hpp"
#include "raceopt/transcription/grid.hpp"
#include "raceopt/transcription/transcribe.hpp"

using namespace raceopt;
using namespace raceopt::transcription;
using test_support::double_integrator_bounds;
using test_support::DoubleIntegrator;

namespace {

double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Collocation, RadauPointsAreRoots) {
  for (int d = 1; d <= 4; ++d) {
    const auto tau = radau_points(d);
    ASSERT_EQ(static_cast<int>(tau.size()), d);
    EXPECT_DOUBLE_EQ(tau.back(), 1.0);
    for (int j = 0; j + 1 < d; ++j) {
      const double x = 2.0 * tau[j] - 1.0;
      EXPECT_NEAR(legendre(d, x) - legendre(d - 1, x), 0.0, 1e-13);
      EXPECT_LT(tau[j], tau[j + 1]);
    }
  }
  // Known values for d = 2.
  const auto t2 = radau_points(2);
  EXPECT_NEAR(t2[0], 1.0 / 3.0, 1e-14);
  expect_code(ErrorCode::unsupported_degree, [] { radau_points(5); });
}

TEST(Collocation, DifferentiationMatrixProperties) {
  for (int d = 2; d <= 4; ++d) {
    const auto s = make_scheme(d);
    ASSERT_EQ(s.D.rows(), d + 1);
    ASSERT_EQ(s.D.cols(), d);
    for (int k = 0; k < d; ++k) EXPECT_NEAR(s.D.col(k).sum(), 0.0, 1e-12);
    std::vector<double> nodes{0.0};
    nodes.insert(nodes.end(), s.points.begin(), s.points.end());
    // Exact on polynomials up to degree d.
    for (int p = 0; p <= d; ++p)
      for (int k = 0; k < d; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= d; ++j) acc += s.D(j, k) * std::pow(nodes[j], p);
        const double expect = p == 0 ? 0.0 : p * std::pow(s.points[k], p - 1);
        EXPECT_NEAR(acc, expect, 1e-11);
      }
    // Radau quadrature is exact to degree 2d - 2.
    for (int p = 0; p <= 2 * d - 2; ++p) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) q += s.weights[k] * std::pow(s.points[k], p);
      EXPECT_NEAR(q, 1.0 / (p + 1), 1e-12);
    }
  }
  expect_code(ErrorCode::duplicate_nodes, [] { differentiation_matrix({0.5, 0.5}); });
}

TEST(Collocation, LagrangeBasis) {
  const auto tau = radau_points(3);
  const auto b = lagrange_basis(tau, 0.37);
  EXPECT_NEAR(b.sum(), 1.0, 1e-14);
  EXPECT_NEAR(lagrange_basis_derivative(tau, 0.37).sum(), 0.0, 1e-12);
  const auto at = lagrange_basis(tau, tau[1]);
  EXPECT_NEAR(at[2], 1.0, 1e-14);
}

TEST(Grid, UniformAndJoints) {
  GridSpec g{10, 3, 0.0, 100.0};
  auto b = interval_boundaries(g, {});
  ASSERT_EQ(b.size(), 11u);
  EXPECT_DOUBLE_EQ(b[3], 30.0);
  // Near a base boundary: snapped.
  b = interval_boundaries(g, {31.0});
  ASSERT_EQ(b.size(), 11u);
  EXPECT_DOUBLE_EQ(b[3], 31.0);
  // Mid-interval: split.
  b = interval_boundaries(g, {45.0});
  ASSERT_EQ(b.size(), 12u);
  EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
  EXPECT_NE(std::find(b.begin(), b.end(), 45.0), b.end());
  expect_code(ErrorCode::unsupported_degree, [] { validate({10, 5, 0.0, 1.0}); });
  expect_code(ErrorCode::invalid_argument, [] { validate({1, 3, 0.0, 1.0}); });
}

TEST(Transcription, LinearOdeMatchesExponential) {
  const double e = test_support::linear_ode_endpoint_error(-1.0, 8, 3);
  EXPECT_LT(e, 1e-7);
  EXPECT_GT(e, 0.0);
}

TEST(Transcription, LinearOdeConvergenceOrder) {
  std::vector<double> logh, loge;
  for (int K : {4, 8, 16, 32}) {
    logh.push_back(std::log(1.0 / K));
    loge.push_back(std::log(test_support::linear_ode_endpoint_error(2.0, K, 3)));
  }
  for (std::size_t i = 1; i < logh.size(); ++i) {
    const double slope = (loge[i] - loge[i - 1]) / (logh[i] - logh[i - 1]);
    EXPECT_GT(slope, 4.5) << "pair " << i;
  }
}

TEST(Transcription, DoubleIntegratorBangBang) {
  const int K = 20;
  auto tr = test_support::double_integrator(K);
  nlp::SolverOptions opts;
  opts.warmstart = tr.nlp.initial_point();
  const auto sol = nlp::solve_interior_point(tr.nlp, opts);
  ASSERT_EQ(sol.status, nlp::SolveStatus::optimal) << sol.message;
  const double T = sol.z[tr.layout.boundary(K, 2)];
  EXPECT_NEAR(T, 2.0, 0.02);
  // Switch from +1 to -1 near sigma = 1/2.
  const auto traj = extract(tr.layout, sol.z, "di", 0, 1, -1);
  double sw = -1;
  for (int k = 0; k < K && sw < 0; ++k)
    for (int j = 0; j < 3; ++j)
      if (traj.u[k][j][0] < 0.0) {
        sw = tr.layout.sigma(k, j + 1) * T;
        break;
      }
  EXPECT_NEAR(sw, 1.0, 0.02 + 1.0 / K * T);
  EXPECT_LE(max_defect(tr, sol.z), 1e-6);
}

namespace {

struct Kin {
  static constexpr int nx = 5, nu = 2, np = 3;
  template <class T>
  void spatial(int, const T*, const T*, T* f, T* p) const {
    for (int i = 0; i < 5; ++i) f[i] = T(0.0);
    for (int i = 0; i < 3; ++i) p[i] = T(0.0);
  }
};

}  // namespace

TEST(Transcription, VariableCountFollowsLayout) {
  OcpBounds b;
  b.x_lower = b.initial_lower = std::vector<double>(5, -1.0);
  b.x_upper = b.initial_upper = std::vector<double>(5, 1.0);
  b.x_scale = std::vector<double>(5, 1.0);
  b.x_offset = std::vector<double>(5, 0.0);
  b.u_lower = {-1, -1};
  b.u_upper = {1, 1};
  b.u_scale = {1, 1};
  b.path_lower = std::vector<double>(3, -1.0);
  b.path_upper = std::vector<double>(3, 1.0);
  std::vector<double> bounds(11);
  std::iota(bounds.begin(), bounds.end(), 0.0);
  auto tr = transcribe(std::make_shared<const Kin>(), b, bounds, 3);
  tr.nlp.finalize();
  EXPECT_EQ(tr.nlp.num_variables(), 10 * (3 * (5 + 2)) + 11 * 5);
  EXPECT_EQ(tr.nlp.num_variables(), 265);
  EXPECT_EQ(tr.nlp.num_constraints(), 10 * 3 * 5 + 10 * 5 + 10 * 3 * 3);
}

TEST(Transcription, PackExtractRoundTrip) {
  const int K = 4;
  std::vector<double> bounds{0, 0.2, 0.5, 0.7, 1.0};
  auto b = double_integrator_bounds();
  b.x_scale = {2.0, 0.5, 3.0};
  b.x_offset = {0.1, 0.0, 1.0};
  auto tr = transcribe(std::make_shared<const DoubleIntegrator>(), b, bounds, 3);
  tr.nlp.finalize();
  nlp::Vector z = nlp::Vector::LinSpaced(tr.nlp.num_variables(), -0.3, 0.4);
  const auto traj = extract(tr.layout, z, "di", 0, 1, -1);
  EXPECT_EQ(traj.intervals(), K);
  const nlp::Vector back = pack(tr.layout, traj);
  EXPECT_LT((back - z).lpNorm<Eigen::Infinity>(), 1e-14);
  // Node interpolation is exact.
  EXPECT_LT((traj.interp_state(2, traj.tau[1]) - traj.x[2][2]).norm(), 1e-14);
  expect_code(ErrorCode::out_of_domain, [&] { traj.interp_state(0, 1.5); });
}

TEST(Transcription, InitialStateOffBoundsRejected) {
  auto b = double_integrator_bounds();
  b.initial_lower[0] = b.initial_upper[0] = 20.0;
  expect_code(ErrorCode::infeasible_bounds, [&] {
    transcribe(std::make_shared<const DoubleIntegrator>(), b, {0.0, 0.5, 1.0}, 3);
  });
}
