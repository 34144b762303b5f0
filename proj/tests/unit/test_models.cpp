#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "raceopt/common/error.hpp"
#include "raceopt/geometry/kinematics.hpp"
#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/load_transfer.hpp"
#include "raceopt/models/pacejka.hpp"
#include "raceopt/models/two_track.hpp"
#include "raceopt/nlp/dual.hpp"
#include "../support/oracles.hpp"
#include "../support/tracks.hpp"

using namespace raceopt;
using namespace raceopt::geometry;
using namespace raceopt::models;
using raceopt::test_support::one_segment;
using raceopt::test_support::random_on_road;
using namespace raceopt::test_support;

namespace {

using KState = std::array<double, KinematicModel::nx>;
using KInput = std::array<double, KinematicModel::nu>;
using TState = std::array<double, TwoTrackModel::nx>;
using TInput = std::array<double, TwoTrackModel::nu>;

TrackSurface banked_straight(double angle) {
  TrackDefinition def = one_segment(SurfaceKind::banked_frenet, 100.0, 0.0, 5.0);
  def.banking = {{0.0, angle}, {100.0, angle}};
  return TrackSurface(def);
}

std::vector<TrackSurface> nonplanar_surfaces() {
  TrackDefinition arc = one_segment(SurfaceKind::arc_profile, 80.0, -0.01, 6.0);
  arc.profile_radius = 40.0;
  return {TrackSurface(uturn_track()), TrackSurface(chicane_track()), TrackSurface(arc)};
}

template <class F, std::size_t N>
std::array<double, N> rk4(const std::array<double, N>& x, double h, F rhs) {
  auto axpy = [](const std::array<double, N>& a, double c, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + c * b[i];
    return r;
  };
  const auto k1 = rhs(x);
  const auto k2 = rhs(axpy(x, 0.5 * h, k1));
  const auto k3 = rhs(axpy(x, 0.5 * h, k2));
  const auto k4 = rhs(axpy(x, h, k3));
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

}  // namespace

// --- Pacejka -----------------------------------------------------------------

TEST(Pacejka, ZeroSlipGivesZeroForce) {
  const auto f = pacejka_combined(0.0, 0.0, 4000.0, PacejkaParams{}, 1.0);
  EXPECT_EQ(f.fx, 0.0);
  EXPECT_EQ(f.fy, 0.0);
}

TEST(Pacejka, ZeroLoadGivesZeroForce) {
  const auto f = pacejka_combined(0.1, 0.05, 0.0, PacejkaParams{}, 1.0);
  EXPECT_EQ(f.fx, 0.0);
  EXPECT_EQ(f.fy, 0.0);
}

TEST(Pacejka, NegativeLoadThrows) {
  try {
    pacejka_combined(0.1, 0.0, -1.0, PacejkaParams{}, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::negative_normal_force);
  }
}

TEST(Pacejka, OddInEachSlip) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> k(-0.3, 0.3), a(-0.3, 0.3);
  const PacejkaParams p;
  for (int i = 0; i < 200; ++i) {
    const double kappa = k(rng), alpha = a(rng);
    const auto f = pacejka_combined(kappa, alpha, 3000.0, p, 1.1);
    const auto fk = pacejka_combined(-kappa, alpha, 3000.0, p, 1.1);
    const auto fa = pacejka_combined(kappa, -alpha, 3000.0, p, 1.1);
    EXPECT_NEAR(fk.fx, -f.fx, 1e-9);
    EXPECT_NEAR(fk.fy, f.fy, 1e-9);
    EXPECT_NEAR(fa.fx, f.fx, 1e-9);
    EXPECT_NEAR(fa.fy, -f.fy, 1e-9);
  }
}

TEST(Pacejka, PureSlipPeakIsMuTimesLoad) {
  const PacejkaParams p;
  const double n = 3678.75, mu = 1.2;
  double fx_max = 0.0, fy_max = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double slip = 0.5 * i / 20000.0;
    fx_max = std::max(fx_max, pacejka_combined(slip, 0.0, n, p, mu).fx);
    fy_max = std::max(fy_max, pacejka_combined(0.0, slip, n, p, mu).fy);
  }
  EXPECT_NEAR(fx_max, mu * n, 1e-3 * mu * n);
  EXPECT_NEAR(fy_max, mu * n, 1e-3 * mu * n);
  EXPECT_LE(fx_max, mu * n * (1.0 + 1e-12));
  EXPECT_LE(fy_max, mu * n * (1.0 + 1e-12));
}

TEST(Pacejka, CombinedSlipReducesEachComponent) {
  const PacejkaParams p;
  const auto pure_x = pacejka_combined(0.05, 0.0, 3000.0, p, 1.0);
  const auto pure_y = pacejka_combined(0.0, 0.05, 3000.0, p, 1.0);
  const auto both = pacejka_combined(0.05, 0.05, 3000.0, p, 1.0);
  EXPECT_LT(both.fx, pure_x.fx);
  EXPECT_LT(both.fy, pure_y.fy);
  EXPECT_GT(both.fx, 0.0);
  EXPECT_GT(both.fy, 0.0);
}

// --- load transfer -------------------------------------------------------------

TEST(LoadTransfer, StaticSplitIsEqualForCentredMass) {
  const VehicleParams p;
  const auto n = distribute_normal(14715.0, 0.0, 0.0, p);
  for (double v : n) EXPECT_DOUBLE_EQ(v, 14715.0 / 4.0);
}

TEST(LoadTransfer, BrakingMovesLoadForward) {
  const VehicleParams p;
  // m h a1 / (2 L) = 1500 * 0.4 * 4 / 6 = 400 N per tire.
  const auto n = distribute_normal(14715.0, -4.0, 0.0, p);
  EXPECT_NEAR(n[kFrontLeft], 14715.0 / 4.0 + 400.0, 1e-9);
  EXPECT_NEAR(n[kFrontRight], 14715.0 / 4.0 + 400.0, 1e-9);
  EXPECT_NEAR(n[kRearLeft], 14715.0 / 4.0 - 400.0, 1e-9);
  EXPECT_NEAR(n[kRearRight], 14715.0 / 4.0 - 400.0, 1e-9);
}

TEST(LoadTransfer, SatisfiesForceAndMomentBalance) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> acc(-8.0, 8.0), net(5000.0, 30000.0), geom(0.6, 1.8), share(0.3, 0.7);
  for (int i = 0; i < 200; ++i) {
    VehicleParams p;
    p.lf = geom(rng);
    p.lr = geom(rng);
    p.tf = 0.5 * geom(rng);
    p.tr = 0.5 * geom(rng);
    p.chi = share(rng);
    const double n_net = net(rng), a1 = acc(rng), a2 = acc(rng);
    const auto n = distribute_normal(n_net, a1, a2, p);
    // Unknowns (FL, FR, RL, RR): vertical force, pitch moment, front and rear
    // roll moments (lateral transfer shared chi : 1 - chi).
    Eigen::Matrix4d A;
    A << 1, 1, 1, 1,                      //
        p.lf, p.lf, -p.lr, -p.lr,         //
        -p.tf, p.tf, 0, 0,                //
        0, 0, -p.tr, p.tr;
    const double mh = p.mass * p.h;
    const Eigen::Vector4d b(n_net, -mh * a1, p.chi * mh * a2, (1.0 - p.chi) * mh * a2);
    const Eigen::Vector4d expect = A.partialPivLu().solve(b);
    for (int w = 0; w < 4; ++w) EXPECT_NEAR(n[w], expect[w], 1e-8 * n_net);
    EXPECT_NEAR(n[0] + n[1] + n[2] + n[3], n_net, 1e-9 * n_net);
  }
}

// --- kinematic model -----------------------------------------------------------

TEST(KinematicModel, FlatStraightExample) {
  const TrackSurface surf(flat_straight_track(100.0, 5.0));
  VehicleParams p;
  p.c_drag = 0.0;
  const auto dx = kinematic_rhs({10.0, 0.0, 0.0, 20.0, 0.0}, {2.0, 0.0}, surf, p);
  EXPECT_NEAR(dx[KinematicModel::kS], 20.0, 1e-12);
  EXPECT_NEAR(dx[KinematicModel::kY], 0.0, 1e-12);
  EXPECT_NEAR(dx[KinematicModel::kTheta], 0.0, 1e-12);
  EXPECT_NEAR(dx[KinematicModel::kV], 2.0, 1e-12);
  EXPECT_EQ(dx[KinematicModel::kT], 1.0);
}

// Planar Frenet bicycle written out by hand.
TEST(KinematicModel, FlatTrackReducesToPlanarBicycle) {
  std::mt19937 rng(5);
  const VehicleParams p;
  for (double kappa : {0.0, 0.02, -0.04}) {
    const TrackSurface surf(one_segment(SurfaceKind::flat_frenet, 100.0, kappa, 5.0));
    for (int i = 0; i < 100; ++i) {
      const KState x = random_kinematic_state(surf, rng);
      const KInput u = random_kinematic_input(rng);
      const auto ref = planar_kinematic(x, u, p, kappa);
      const auto dx = kinematic_rhs(x, u, surf, p);
      for (int c = 0; c < 4; ++c) EXPECT_NEAR(dx[c], ref[c], 1e-10 * std::max(1.0, std::abs(ref[c]))) << c;
      const auto res = kinematic_force_residuals(x, u, surf, p);
      EXPECT_NEAR(res.n_net, p.mass * kGravityMagnitude, 1e-8);
    }
  }
}

TEST(KinematicModel, BankedStraightAlongTrackHasNoGravityPull) {
  const TrackSurface surf = banked_straight(0.3);
  VehicleParams p;
  p.c_drag = 0.0;
  const auto dx = kinematic_rhs({50.0, 1.0, 0.0, 15.0, 0.0}, {0.0, 0.0}, surf, p);
  EXPECT_NEAR(dx[KinematicModel::kV], 0.0, 1e-12);
  // Heading up the bank: gravity decelerates by g sin(beta) sin(theta).
  const double th = 0.2;
  const auto up = kinematic_rhs({50.0, 1.0, th, 15.0, 0.0}, {0.0, 0.0}, surf, p);
  const double expect = -kGravityMagnitude * std::sin(0.3) * std::sin(th);
  EXPECT_NEAR(std::abs(up[KinematicModel::kV]), std::abs(expect), 1e-10);
}

TEST(KinematicModel, ConeBoundaryOnSteadyCircle) {
  const TrackSurface surf(flat_straight_track(100.0, 5.0));
  VehicleParams p;
  p.c_drag = 0.0;
  const double v = 15.0, L = p.wheelbase();
  const double cap = p.c_cone * p.mu * kGravityMagnitude;
  // Lateral acceleration w3 * |v_body| as a function of tan(delta).
  auto lat = [&](double tau) { return v * tau / L * v * std::hypot(1.0, tau * p.lr / L); };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lat(mid) < cap ? lo : hi) = mid;
  }
  const double delta = std::atan(0.5 * (lo + hi));
  const double w = p.mass * kGravityMagnitude;
  const auto on = kinematic_force_residuals({50.0, 0.0, 0.0, v, 0.0}, {0.0, delta}, surf, p);
  EXPECT_NEAR(on.cone_slack / (w * w), 0.0, 1e-9);
  const auto inside = kinematic_force_residuals({50.0, 0.0, 0.0, v, 0.0}, {0.0, 0.95 * delta}, surf, p);
  const auto outside = kinematic_force_residuals({50.0, 0.0, 0.0, v, 0.0}, {0.0, 1.05 * delta}, surf, p);
  EXPECT_GT(inside.cone_slack, 0.0);
  EXPECT_LT(outside.cone_slack, 0.0);
}

// The force the road transmits equals m (p'' - g) along the contact frame,
// with p'' taken by finite differences of the integrated world position.
TEST(KinematicModel, RoadForceMatchesPathAcceleration) {
  std::mt19937 rng(17);
  const VehicleParams p;
  const double h = 3e-4;
  for (const auto& surf : nonplanar_surfaces()) {
    for (int i = 0; i < 50; ++i) {
      const KState x = random_kinematic_state(surf, rng);
      const KInput u = random_kinematic_input(rng);
      auto rhs = [&](const KState& z) { return kinematic_rhs(z, u, surf, p); };
      const KState xp = rk4(x, h, rhs), xm = rk4(x, -h, rhs);
      auto pos = [&](const KState& z) { return surf.frame({z[0], z[1]}).p; };
      const Vec3<double> acc = (pos(xp) - 2.0 * pos(x) + pos(xm)) * (1.0 / (h * h));
      const Vec3<double> rel = acc - kGravity;
      const auto f = surf.frame({x[0], x[1]});
      const auto b = body_axes<double>(f, x[2]);
      const auto res = kinematic_force_residuals(x, u, surf, p);
      auto tol = [&](double v) { return 1e-5 * std::max(p.mass * kGravityMagnitude, std::abs(v)); };
      EXPECT_NEAR(res.f_req[0], p.mass * dot3(rel, b[0]), tol(res.f_req[0]));
      EXPECT_NEAR(res.f_req[1], p.mass * dot3(rel, b[1]), tol(res.f_req[1]));
      EXPECT_NEAR(res.n_net, p.mass * dot3(rel, f.n), tol(res.n_net));
    }
  }
}

// --- two-track model -----------------------------------------------------------

TEST(TwoTrackModel, FlatTrackReducesToPlanarTwoTrack) {
  std::mt19937 rng(23);
  const VehicleParams p;
  for (double kappa : {0.0, 0.025}) {
    const TrackSurface surf(one_segment(SurfaceKind::flat_frenet, 100.0, kappa, 5.0));
    for (int i = 0; i < 100; ++i) {
      const TState x = random_two_track_state(surf, rng);
      const TInput u = random_two_track_input(rng);
      const auto ref = planar_two_track(x, u, p, kappa);
      const auto dx = two_track_rhs(x, u, surf, p);
      for (int c = 0; c < 6; ++c) EXPECT_NEAR(dx[c], ref.dx[c], 1e-10 * std::max(1.0, std::abs(ref.dx[c]))) << c;
      const auto loads = two_track_constraint_residuals(x, u, surf, p);
      for (int w = 0; w < 4; ++w) {
        EXPECT_NEAR(loads[w].normal, ref.normal[w], 1e-8);
        EXPECT_NEAR(loads[w].cap_slack, p.n_wheel_max - ref.normal[w], 1e-8);
      }
    }
  }
}

TEST(TwoTrackModel, StraightRollingIsSymmetric) {
  const TrackSurface surf(flat_straight_track(100.0, 5.0));
  VehicleParams p;
  p.c_drag = 0.0;
  const auto dx = two_track_rhs({20.0, 0.0, 0.0, 20.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, surf, p);
  EXPECT_NEAR(dx[TwoTrackModel::kV1], 0.0, 1e-12);
  EXPECT_NEAR(dx[TwoTrackModel::kV2], 0.0, 1e-12);
  EXPECT_NEAR(dx[TwoTrackModel::kW3], 0.0, 1e-12);
  const auto loads = two_track_constraint_residuals({20.0, 0.0, 0.0, 20.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, surf, p);
  for (const auto& l : loads) EXPECT_NEAR(l.normal, p.mass * kGravityMagnitude / 4.0, 1e-9);
}

TEST(TwoTrackModel, SteeringLeftYawsLeft) {
  const TrackSurface surf(flat_straight_track(100.0, 5.0));
  const VehicleParams p;
  const auto dx = two_track_rhs({20.0, 0.0, 0.0, 20.0, 0.0, 0.0, 0.0}, {0.05, 0.0, 0.0}, surf, p);
  EXPECT_GT(dx[TwoTrackModel::kW3], 0.0);
  EXPECT_GT(dx[TwoTrackModel::kV2], 0.0);
}

// With no tire force and no drag, kinetic plus potential energy is conserved.
TEST(TwoTrackModel, FreeRollingConservesEnergy) {
  std::mt19937 rng(29);
  VehicleParams p;
  p.c_drag = 0.0;
  for (const auto& surf : nonplanar_surfaces()) {
    for (int i = 0; i < 100; ++i) {
      TState x = random_two_track_state(surf, rng);
      x[TwoTrackModel::kV2] = 0.0;
      x[TwoTrackModel::kW3] = 0.0;
      const auto f = surf.frame({x[0], x[1]});
      const auto rates = pose_kinematics(f, x[2], x[3], 0.0, 0.0);
      if (net_normal_force<double>(f, rates.s_dot, rates.y_dot, p.mass) <= 0.0) continue;  // airborne
      const auto dx = two_track_rhs(x, {0.0, 0.0, 0.0}, surf, p);
      const double h = 1e-6;
      const double zp = surf.frame({x[0] + h * dx[0], x[1] + h * dx[1]}).p.z;
      const double zm = surf.frame({x[0] - h * dx[0], x[1] - h * dx[1]}).p.z;
      const double z_dot = (zp - zm) / (2.0 * h);
      const double kinetic = x[3] * dx[3] + x[4] * dx[4];
      EXPECT_NEAR(kinetic + kGravityMagnitude * z_dot, 0.0, 1e-6 * x[3]);
    }
  }
}

TEST(TwoTrackModel, LoadsSumToNetNormalForce) {
  std::mt19937 rng(31);
  const VehicleParams p;
  for (const auto& surf : nonplanar_surfaces()) {
    for (int i = 0; i < 100; ++i) {
      const TState x = random_two_track_state(surf, rng);
      const TInput u = random_two_track_input(rng);
      const auto f = surf.frame({x[0], x[1]});
      const auto rates = pose_kinematics(f, x[2], x[3], x[4], x[5]);
      const double n_net = net_normal_force<double>(f, rates.s_dot, rates.y_dot, p.mass);
      const auto loads = two_track_constraint_residuals(x, u, surf, p);
      double sum = 0.0;
      for (const auto& l : loads) sum += l.normal;
      EXPECT_NEAR(sum, n_net, 1e-9 * std::abs(n_net));
    }
  }
}

// --- derivatives ---------------------------------------------------------------

TEST(ModelDerivatives, KinematicJacobianMatchesFiniteDifferences) {
  std::mt19937 rng(37);
  const auto surfaces = nonplanar_surfaces();
  for (int i = 0; i < 200; ++i) {
    const auto& surf = surfaces[i % surfaces.size()];
    const double err = model_jacobian_error<KinematicModel>(surf, random_kinematic_state(surf, rng),
                                                            random_kinematic_input(rng), KinematicRhs{});
    EXPECT_LE(err, 1e-6);
  }
}

TEST(ModelDerivatives, TwoTrackJacobianMatchesFiniteDifferences) {
  std::mt19937 rng(41);
  const auto surfaces = nonplanar_surfaces();
  for (int i = 0; i < 200; ++i) {
    const auto& surf = surfaces[i % surfaces.size()];
    const double err = model_jacobian_error<TwoTrackModel>(surf, random_two_track_state(surf, rng),
                                                           random_two_track_input(rng), TwoTrackRhs{});
    EXPECT_LE(err, 1e-6);
  }
}
